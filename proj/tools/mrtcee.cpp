#include "mrtcee/cli.hpp"

int main(int argc, char** argv) {
    return mrtcee::run_cli(argc, argv);
}
