#include "mfgh/cli.hpp"

int main(int argc, char** argv) { return mfgh::run_cli(argc, argv); }
