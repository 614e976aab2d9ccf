#pragma once

#include <string>
#include <vector>

namespace fsreach::cli {

// sysexits.h values
inline constexpr int kExitOk = 0;
inline constexpr int kExitMissionIncomplete = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitCollision = 3;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitDataError = 65;
inline constexpr int kExitNoInput = 66;
inline constexpr int kExitSoftware = 70;
inline constexpr int kExitCantCreate = 73;

int dispatch(int argc, const char* const* argv);
int dispatch(const std::vector<std::string>& args);

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& data);

}  // namespace fsreach::cli
