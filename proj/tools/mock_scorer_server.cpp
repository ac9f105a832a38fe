// Standalone wrapper around the conformance mock so `recommend --backend
// remote` can be exercised without a real model service.
#include <csignal>
#include <cstdlib>
#include <iostream>

#include "../tests/support/mock_scorer.hpp"

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 0;
  lenspipe::testing::MockScorerServer server(seed);
  const int port = server.start();
  std::cout << "mock scorer listening on 127.0.0.1:" << port << " (seed " << seed << ")\n";
  std::cout << "press enter to stop\n";
  std::cin.get();
  return 0;
}
