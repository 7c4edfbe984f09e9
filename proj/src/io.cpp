#include "denoiser/io.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include "denoiser/errors.hpp"

namespace denoiser::io {

namespace fs = std::filesystem;

namespace {

fs::path temp_path(const fs::path& path) {
  fs::path tmp = path;
  tmp += ".tmp";
  return tmp;
}

void write_plain(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << contents;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  const fs::path tmp = temp_path(path);
  write_plain(tmp, contents);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place: " + path.string());
  }
}

OutputBatch::~OutputBatch() {
  if (committed_) return;
  std::error_code ec;
  for (const auto& [tmp, final_path] : staged_) fs::remove(tmp, ec);
}

void OutputBatch::stage(const fs::path& path, const std::string& contents) {
  const fs::path tmp = temp_path(path);
  write_plain(tmp, contents);
  staged_.emplace_back(tmp, path);
}

void OutputBatch::commit() {
  for (const auto& [tmp, final_path] : staged_) {
    std::error_code ec;
    fs::rename(tmp, final_path, ec);
    if (ec) throw IoError("cannot move output into place: " + final_path.string());
  }
  committed_ = true;
}

}  // namespace denoiser::io
