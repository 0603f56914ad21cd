#include "trd/cli.hpp"

int main(int argc, char** argv) { return trd::cli::dispatch(argc, argv); }
