#include "phrasecritic/cli.hpp"

int main(int argc, char** argv) { return phrasecritic::run(argc, argv); }
