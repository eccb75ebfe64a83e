#include <vector>
#include <string>

#include "attnplan/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return attnplan::run_cli(args);
}
