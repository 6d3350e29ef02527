#include "cli.hpp"

int main(int argc, char** argv) { return mollikit::cli::run(argc, argv); }
