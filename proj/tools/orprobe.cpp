#include <string>
#include <vector>

#include "orprobe/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return orprobe::run_cli(args);
}
