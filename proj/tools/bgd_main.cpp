#include "bgd/harness.hpp"

int main(int argc, char** argv) { return bgd::cli_main(argc, argv); }
