#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace denoiser::io {

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Stages several outputs and publishes them together: nothing is renamed
/// into place until commit(), and staged temp files are removed if the
/// batch is destroyed uncommitted.
class OutputBatch {
 public:
  OutputBatch() = default;
  OutputBatch(const OutputBatch&) = delete;
  OutputBatch& operator=(const OutputBatch&) = delete;
  ~OutputBatch();

  void stage(const std::filesystem::path& path, const std::string& contents);
  void commit();

 private:
  std::vector<std::pair<std::filesystem::path, std::filesystem::path>> staged_;  // (temp, final)
  bool committed_ = false;
};

}  // namespace denoiser::io
