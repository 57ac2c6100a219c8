#include "degenwave/cli_io.hpp"

int main(int argc, char** argv) { return degenwave::cli_main(argc, argv); }
