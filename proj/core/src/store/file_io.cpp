#include "file_io.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "demoforge/store/records.hpp"

namespace demoforge::store::io {

namespace {

[[noreturn]] void storage_failure(const std::string& what, const std::filesystem::path& path) {
  throw StoreError(StoreError::Kind::storage, what + " " + path.string() + ": " + std::strerror(errno));
}

void write_all(int fd, std::string_view bytes, const std::filesystem::path& path) {
  while (!bytes.empty()) {
    const ssize_t n = ::write(fd, bytes.data(), bytes.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      storage_failure("write", path);
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

}  // namespace

void fsync_path(const std::filesystem::path& path) {
  const int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

void write_atomic(const std::filesystem::path& path, std::string_view contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) storage_failure("open", tmp);
  write_all(fd, contents, tmp);
  if (::fsync(fd) != 0) {
    ::close(fd);
    storage_failure("fsync", tmp);
  }
  ::close(fd);
  if (::rename(tmp.c_str(), path.c_str()) != 0) storage_failure("rename", path);
  fsync_path(path.parent_path());
}

void append_line(const std::filesystem::path& path, std::string_view line) {
  AppendFile f(path);
  std::string buf;
  buf.reserve(line.size() + 1);
  buf.append(line);
  buf.push_back('\n');
  f.write(buf);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError(StoreError::Kind::storage, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Line> read_lines(const std::filesystem::path& path) {
  std::vector<Line> out;
  if (!std::filesystem::exists(path)) return out;
  const std::string data = read_file(path);
  std::size_t pos = 0;
  int number = 0;
  while (pos < data.size()) {
    const std::size_t nl = data.find('\n', pos);
    ++number;
    if (nl == std::string::npos) {
      out.push_back({data.substr(pos), number, false});
      break;
    }
    out.push_back({data.substr(pos, nl - pos), number, true});
    pos = nl + 1;
  }
  return out;
}

AppendFile::AppendFile(const std::filesystem::path& path) : path_(path) {
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) storage_failure("open", path);
}

AppendFile::~AppendFile() {
  if (fd_ >= 0) ::close(fd_);
}

void AppendFile::write(std::string_view bytes) { write_all(fd_, bytes, path_); }

void AppendFile::sync() {
  if (::fdatasync(fd_) != 0) storage_failure("fdatasync", path_);
}

}  // namespace demoforge::store::io
