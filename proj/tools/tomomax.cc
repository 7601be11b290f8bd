#include <string>
#include <vector>

#include "tomomax/cli.h"

int main(int argc, char **argv) {
    return tomomax::run_cli(std::vector<std::string>(argv, argv + argc));
}
