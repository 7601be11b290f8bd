#include "tomomax/serialization.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace tomomax {

namespace fs = std::filesystem;

Json number_to_json(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    return x;
}

double number_from_json(const Json &j) {
    if (j.is_number()) {
        return j.get<double>();
    }
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") {
            return kInf;
        }
        if (s == "-inf") {
            return -kInf;
        }
        if (s == "nan") {
            return std::nan("");
        }
    }
    throw Error(ErrorCode::InvalidArgument, "expected a number, got " + j.dump());
}

Json to_json(const Vec3 &r, int dim) {
    Json out = Json::array();
    for (int k = 0; k < dim; k++) {
        out.push_back(number_to_json(r[static_cast<std::size_t>(k)]));
    }
    return out;
}

Vec3 vec_from_json(const Json &j) {
    if (!j.is_array() || j.empty() || j.size() > 3) {
        throw Error(ErrorCode::ShapeMismatch, "expected a vector of 1 to 3 numbers");
    }
    Vec3 out{};
    for (std::size_t k = 0; k < j.size(); k++) {
        out[k] = number_from_json(j[k]);
    }
    return out;
}

Json to_json(const BlochState &state) {
    return {{"kind", kind_name(state.kind())}, {"r", to_json(state.r(), state.dim())}};
}

BlochState state_from_json(const Json &j) {
    StateKind kind = kind_from_name(j.at("kind").get<std::string>());
    return BlochState(kind, vec_from_json(j.at("r")));
}

Json to_json(const ExperimentDesign &design) {
    Json axes = Json::array();
    for (const Vec3 &a : design.axes()) {
        axes.push_back(to_json(a, dimension(design.kind())));
    }
    return {{"kind", kind_name(design.kind())}, {"axes", axes}, {"shots", design.shots()}};
}

ExperimentDesign design_from_json(const Json &j) {
    StateKind kind = kind_from_name(j.at("kind").get<std::string>());
    std::vector<Vec3> axes;
    for (const Json &a : j.at("axes")) {
        axes.push_back(vec_from_json(a));
    }
    return ExperimentDesign(kind, std::move(axes), j.at("shots").get<std::vector<int>>());
}

Json to_json(const Dataset &dataset) {
    return {{"counts", dataset.counts}};
}

Dataset dataset_from_json(const Json &j) {
    return Dataset{j.at("counts").get<std::vector<int>>()};
}

Json to_json(const DiscretePrior &prior) {
    Json supports = Json::array();
    Json weights = Json::array();
    for (std::size_t i = 0; i < prior.size(); i++) {
        supports.push_back(to_json(prior.support(i).r(), prior.support(i).dim()));
        weights.push_back(number_to_json(prior.weight(i)));
    }
    return {{"kind", kind_name(prior.kind())}, {"supports", supports}, {"weights", weights}};
}

DiscretePrior prior_from_json(const Json &j) {
    StateKind kind = kind_from_name(j.at("kind").get<std::string>());
    std::vector<BlochState> supports;
    for (const Json &s : j.at("supports")) {
        supports.emplace_back(kind, vec_from_json(s));
    }
    std::vector<double> weights;
    for (const Json &w : j.at("weights")) {
        weights.push_back(number_from_json(w));
    }
    return DiscretePrior(std::move(supports), std::move(weights));
}

Json to_json(const TabulatedEstimator &estimator) {
    const int dim = dimension(estimator.design().kind());
    Json entries = Json::array();
    for (const Vec3 &e : estimator.entries()) {
        entries.push_back(to_json(e, dim));
    }
    return {
        {"design", to_json(estimator.design())},
        {"provenance", estimator.provenance()},
        {"allow_unphysical", estimator.allow_unphysical()},
        {"entries", entries}};
}

TabulatedEstimator estimator_from_json(const Json &j) {
    std::vector<Vec3> entries;
    entries.reserve(j.at("entries").size());
    for (const Json &e : j.at("entries")) {
        entries.push_back(vec_from_json(e));
    }
    return TabulatedEstimator(
        design_from_json(j.at("design")),
        std::move(entries),
        j.at("provenance").get<std::string>(),
        j.value("allow_unphysical", false));
}

Json to_json(const LfpResult &result, const std::string &estimator_path) {
    Json history = Json::array();
    for (const LfpIteration &it : result.history) {
        history.push_back(
            {{"iteration", it.iteration},
             {"av_risk", number_to_json(it.av_risk)},
             {"max_risk", number_to_json(it.max_risk)},
             {"support_count", it.support_count}});
    }
    Json settings = Json::object();
    for (const auto &[name, value] : result.settings) {
        settings[name] = number_to_json(value);
    }
    Json out = {
        {"algorithm", result.algorithm},
        {"status", result.status == LfpStatus::Converged ? "converged" : "iteration_limit"},
        {"prior", to_json(result.prior)},
        {"av_risk", number_to_json(result.av_risk)},
        {"max_risk", number_to_json(result.max_risk)},
        {"gap", number_to_json(result.gap)},
        {"argmax", to_json(result.argmax, dimension(result.prior.kind()))},
        {"iterations", result.iterations},
        {"wall_seconds", number_to_json(result.wall_seconds)},
        {"history", history},
        {"settings", settings},
        {"seed", result.seed},
        {"rng_state", result.rng_state},
        {"design", to_json(result.estimator.design())},
    };
    if (estimator_path.empty()) {
        out["estimator"] = to_json(result.estimator);
    } else {
        out["estimator_path"] = estimator_path;
    }
    return out;
}

LfpResult lfp_from_json(const Json &j, const std::string &base_dir) {
    std::optional<TabulatedEstimator> estimator;
    if (j.contains("estimator")) {
        estimator = estimator_from_json(j.at("estimator"));
    } else {
        fs::path path = j.at("estimator_path").get<std::string>();
        if (path.is_relative() && !base_dir.empty()) {
            path = fs::path(base_dir) / path;
        }
        estimator = estimator_from_json(parse_json(read_file(path.string()), path.string()));
    }
    if (!(estimator->design() == design_from_json(j.at("design")))) {
        throw Error(ErrorCode::DesignMismatch, "estimator table design differs from the result's design");
    }
    std::vector<LfpIteration> history;
    for (const Json &h : j.at("history")) {
        history.push_back(
            {h.at("iteration").get<int>(),
             number_from_json(h.at("av_risk")),
             number_from_json(h.at("max_risk")),
             h.at("support_count").get<std::size_t>()});
    }
    std::vector<std::pair<std::string, double>> settings;
    for (const auto &[name, value] : j.at("settings").items()) {
        settings.emplace_back(name, number_from_json(value));
    }
    return LfpResult{
        prior_from_json(j.at("prior")),
        std::move(*estimator),
        number_from_json(j.at("av_risk")),
        number_from_json(j.at("max_risk")),
        number_from_json(j.at("gap")),
        vec_from_json(j.at("argmax")),
        j.at("iterations").get<int>(),
        number_from_json(j.at("wall_seconds")),
        j.at("algorithm").get<std::string>(),
        j.at("status").get<std::string>() == "converged" ? LfpStatus::Converged : LfpStatus::IterationLimit,
        std::move(history),
        std::move(settings),
        j.at("seed").get<std::uint64_t>(),
        j.at("rng_state").get<std::string>()};
}

Json to_json(const RiskReport &report) {
    const int dim = dimension(report.design.kind());
    Json profile = Json::array();
    for (const auto &[t, v] : report.profile) {
        profile.push_back({number_to_json(t), number_to_json(v)});
    }
    Json out = {
        {"pointwise_max", number_to_json(report.pointwise_max)},
        {"argmax_state", to_json(report.argmax_state, dim)},
        {"profile", profile},
        {"design", to_json(report.design)},
        {"provenance", report.provenance},
    };
    out["bayes_risk"] = report.bayes_risk ? number_to_json(*report.bayes_risk) : Json(nullptr);
    return out;
}

std::string dump(const Json &j) {
    return j.dump(2) + "\n";
}

Json parse_json(const std::string &text, const std::string &source) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error &e) {
        throw Error(ErrorCode::Io, source + ": " + e.what());
    }
}

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string &path, const std::string &content) {
    fs::path target(path);
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path());
    }
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorCode::Io, "cannot write " + tmp.string());
        }
        out << content;
        out.flush();
        if (!out) {
            throw Error(ErrorCode::Io, "write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error(ErrorCode::Io, "cannot rename into " + path + ": " + ec.message());
    }
}

std::string format_double(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string to_csv(const std::vector<std::string> &header, const std::vector<std::vector<double>> &rows) {
    std::string out;
    for (std::size_t c = 0; c < header.size(); c++) {
        out += (c ? "," : "") + header[c];
    }
    out += "\n";
    for (const auto &row : rows) {
        if (row.size() != header.size()) {
            throw Error(ErrorCode::ShapeMismatch, "CSV row width differs from the header");
        }
        for (std::size_t c = 0; c < row.size(); c++) {
            if (c) {
                out += ",";
            }
            out += format_double(row[c]);
        }
        out += "\n";
    }
    return out;
}

}  // namespace tomomax
