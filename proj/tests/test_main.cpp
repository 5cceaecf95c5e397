#include <catch2/catch_amalgamated.hpp>

#include "isac/alloc.hpp"

int main(int argc, char** argv) {
  isac::tune_allocator();
  return Catch::Session().run(argc, argv);
}
