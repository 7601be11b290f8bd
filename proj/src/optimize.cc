#include "tomomax/optimize.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tomomax {

bool solve_spd(const double *a, const double *b, double *x, int n) {
    double l[9] = {};
    for (int i = 0; i < n; i++) {
        for (int j = 0; j <= i; j++) {
            double s = a[i * n + j];
            for (int k = 0; k < j; k++) {
                s -= l[i * 3 + k] * l[j * 3 + k];
            }
            if (i == j) {
                if (!(s > 0.0)) {
                    return false;
                }
                l[i * 3 + i] = std::sqrt(s);
            } else {
                l[i * 3 + j] = s / l[j * 3 + j];
            }
        }
    }
    double y[3];
    for (int i = 0; i < n; i++) {
        double s = b[i];
        for (int k = 0; k < i; k++) {
            s -= l[i * 3 + k] * y[k];
        }
        y[i] = s / l[i * 3 + i];
    }
    for (int i = n - 1; i >= 0; i--) {
        double s = y[i];
        for (int k = i + 1; k < n; k++) {
            s -= l[k * 3 + i] * x[k];
        }
        x[i] = s / l[i * 3 + i];
    }
    return true;
}

NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double> &)> &fn,
    std::vector<double> x0,
    const NelderMeadOptions &options) {
    const std::size_t n = x0.size();
    int evals = 0;
    auto eval = [&](const std::vector<double> &x) {
        evals++;
        double v = fn(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; i++) {
        simplex[i + 1][i] += options.initial_step;
    }
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i <= n; i++) {
        values[i] = eval(simplex[i]);
    }
    std::vector<std::size_t> order(n + 1);
    bool converged = false;
    while (evals < options.max_evals) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::size_t best = order.front();
        std::size_t worst = order.back();
        std::size_t second = order[n - 1];
        double spread = 0.0;
        for (std::size_t i = 0; i <= n; i++) {
            for (std::size_t k = 0; k < n; k++) {
                spread = std::max(spread, std::fabs(simplex[i][k] - simplex[best][k]));
            }
        }
        double f_spread = values[worst] - values[best];
        if (spread < options.x_tol || (std::isfinite(f_spread) && f_spread <= options.f_tol && spread < 1e3 * options.x_tol)) {
            converged = true;
            break;
        }
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; i++) {
            if (i == worst) {
                continue;
            }
            for (std::size_t k = 0; k < n; k++) {
                centroid[k] += simplex[i][k] / static_cast<double>(n);
            }
        }
        auto along = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t k = 0; k < n; k++) {
                p[k] = centroid[k] + t * (simplex[worst][k] - centroid[k]);
            }
            return p;
        };
        std::vector<double> xr = along(-1.0);
        double fr = eval(xr);
        if (fr < values[best]) {
            std::vector<double> xe = along(-2.0);
            double fe = eval(xe);
            if (fe < fr) {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second]) {
            simplex[worst] = xr;
            values[worst] = fr;
            continue;
        }
        bool outside = fr < values[worst];
        std::vector<double> xc = along(outside ? -0.5 : 0.5);
        double fc = eval(xc);
        if (fc < (outside ? fr : values[worst])) {
            simplex[worst] = xc;
            values[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; i++) {
            if (i == best) {
                continue;
            }
            for (std::size_t k = 0; k < n; k++) {
                simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
            }
            values[i] = eval(simplex[i]);
        }
    }
    std::size_t best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    return NelderMeadResult{simplex[best], values[best], evals, converged};
}

double golden_section_max(const std::function<double(double)> &fn, double lo, double hi, double x_tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = fn(c);
    double fd = fn(d);
    while (b - a > x_tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = fn(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = fn(d);
        }
    }
    double mid = 0.5 * (a + b);
    double best = mid;
    double fbest = fn(mid);
    for (double x : {lo, hi}) {
        double fx = fn(x);
        if (fx > fbest) {
            fbest = fx;
            best = x;
        }
    }
    return best;
}

std::vector<double> project_to_simplex(const std::vector<double> &v) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < u.size(); j++) {
        cumulative += u[j];
        double t = (cumulative - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) {
            theta = t;
        }
    }
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); i++) {
        out[i] = std::max(0.0, v[i] - theta);
    }
    return out;
}

}  // namespace tomomax
