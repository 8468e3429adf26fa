#pragma once

#include <spdlog/spdlog.h>

namespace bevlab {

/// Shared logger. Level comes from BEVLAB_LOG (error|warn|info|debug), default warn.
spdlog::logger& logger();

}  // namespace bevlab
