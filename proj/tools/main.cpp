#include "smot/cli.hpp"

int main(int argc, char** argv) { return smot::cli_dispatch(argc, argv); }
