#pragma once

namespace mll {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kReportSchema = "mll.report/1";
inline constexpr const char* kTableSchema = "mll.table/1";

}  // namespace mll
