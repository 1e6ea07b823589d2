#include <string>
#include <vector>

#include "hyperlearn/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return hyperlearn::cli::run(args);
}
