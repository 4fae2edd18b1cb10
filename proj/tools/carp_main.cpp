#include "carp/cli.hpp"

int main(int argc, char** argv) { return carp::cli::main(argc, argv); }
