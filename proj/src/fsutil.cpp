#include "netsem/fsutil.hpp"

#include <fstream>
#include <sstream>

#include "netsem/error.hpp"

namespace fs = std::filesystem;

namespace netsem {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MissingFile, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::MissingFile, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(Errc::MissingFile, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

fs::path staging_dir_for(const fs::path& target) {
  fs::path clean = target.lexically_normal();
  if (!clean.has_filename()) clean = clean.parent_path();
  fs::path staged = clean;
  staged += ".staging";
  fs::remove_all(staged);
  fs::create_directories(staged);
  return staged;
}

void commit_dir(const fs::path& staged, const fs::path& target) {
  fs::path clean = target.lexically_normal();
  if (!clean.has_filename()) clean = clean.parent_path();
  if (fs::exists(clean)) fs::remove_all(clean);
  if (clean.has_parent_path()) fs::create_directories(clean.parent_path());
  fs::rename(staged, clean);
}

}  // namespace netsem
