#include "bevlab/log.hpp"

#include <cstdlib>
#include <memory>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>

namespace bevlab {

namespace {

spdlog::level::level_enum level_from_env() {
  const char* env = std::getenv("BEVLAB_LOG");
  if (env == nullptr) return spdlog::level::warn;
  const std::string value(env);
  if (value == "error") return spdlog::level::err;
  if (value == "info") return spdlog::level::info;
  if (value == "debug") return spdlog::level::debug;
  return spdlog::level::warn;
}

}  // namespace

spdlog::logger& logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto sink = std::make_shared<spdlog::sinks::stderr_color_sink_mt>();
    auto log = std::make_shared<spdlog::logger>("bevlab", sink);
    log->set_level(level_from_env());
    log->set_pattern("[%l] %v");
    return log;
  }();
  return *instance;
}

}  // namespace bevlab
