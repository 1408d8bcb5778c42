#pragma once

#include <functional>
#include <string>
#include <vector>

namespace adgrid {

// write-temp-then-rename; the destination never holds a partial file
void atomic_write_file(const std::string& path, const std::string& content);

std::string format_double(double v);  // shortest round-trip form, stable

// Minimal RFC-4180 row writer (quotes only when needed).
std::string csv_row(const std::vector<std::string>& fields);

// Deterministic parallel map: tasks run work-stealing, results land by index.
void parallel_for(int threads, int count, const std::function<void(int)>& fn);

}  // namespace adgrid
