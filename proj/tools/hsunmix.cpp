#include <string>
#include <vector>

#include "hsu/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return hsu::cli::run(args);
}
