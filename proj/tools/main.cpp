#include "cbleak/cli.hpp"

int main(int argc, char** argv) {
    return cbleak::cli_dispatch(argc, argv);
}
