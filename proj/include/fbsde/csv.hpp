#pragma once

#include <filesystem>
#include <string>

namespace fbsde {

// 17 significant digits: doubles round-trip bit-exactly through the text form.
std::string fmt_g17(double x);

// Writes content to path through a temp file plus atomic rename, so readers
// never observe a partially written file.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace fbsde
