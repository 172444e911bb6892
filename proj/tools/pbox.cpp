#include "pbox/harness.hpp"

int main(int argc, char** argv) { return pbox::harness::cli_main(argc, argv); }
