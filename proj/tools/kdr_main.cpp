#include "kdr/cli.hpp"

int main(int argc, char** argv) { return kdr::cli::run(argc, argv); }
