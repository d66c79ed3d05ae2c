#include "rulekit/cli.hpp"

int main(int argc, char** argv) { return rulekit::cli_main(argc, argv); }
