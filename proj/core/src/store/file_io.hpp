#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace demoforge::store::io {

/// write temp, fsync, rename over `path`, fsync the directory.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

/// Appends `line` plus LF with a single write on an O_APPEND descriptor.
void append_line(const std::filesystem::path& path, std::string_view line);

void fsync_path(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

struct Line {
  std::string text;
  int number = 0;        // 1-based
  bool terminated = true;  // false for a trailing line without LF
};

/// Splits a log file into lines. A missing file reads as empty.
std::vector<Line> read_lines(const std::filesystem::path& path);

/// Append-only log file held open by a writer.
class AppendFile {
 public:
  explicit AppendFile(const std::filesystem::path& path);
  ~AppendFile();
  AppendFile(const AppendFile&) = delete;
  AppendFile& operator=(const AppendFile&) = delete;

  void write(std::string_view bytes);
  void sync();

 private:
  int fd_ = -1;
  std::filesystem::path path_;
};

}  // namespace demoforge::store::io
