#include "gdn/cli.hpp"

int main(int argc, char** argv) { return gdn::run_cli(argc, argv); }
