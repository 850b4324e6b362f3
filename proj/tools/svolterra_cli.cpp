#include <string>
#include <vector>

#include "svolterra/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return sve::cli_main(args);
}
