#include "oim/cli.hpp"

int main(int argc, char** argv) {
    return oim::cli::run(argc, argv);
}
