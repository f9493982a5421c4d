#include <atomic>
#include <csignal>
#include <iostream>

#include "htile/cli.hpp"

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_interrupt(int) { g_interrupted.store(true); }

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_interrupt);
  std::signal(SIGTERM, on_interrupt);
  return htile::cli::run_cli(argc, argv, std::cout, std::cerr, &g_interrupted);
}
