#include "causalcast/cli.hpp"

int main(int argc, char** argv) { return causalcast::cli::run(argc, argv); }
