#include "tmaze/text_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tmaze/error.hpp"

namespace tmaze {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBadLength: return "BAD_LENGTH";
    case ErrorCode::kUnresolvable: return "UNRESOLVABLE";
    case ErrorCode::kNoSupport: return "NO_SUPPORT";
    case ErrorCode::kEmptyTraversal: return "EMPTY_TRAVERSAL";
    case ErrorCode::kDegenerate: return "DEGENERATE";
    case ErrorCode::kCheckpointCorrupt: return "CHECKPOINT_CORRUPT";
    case ErrorCode::kConfig: return "CONFIG";
    case ErrorCode::kLayout: return "LAYOUT";
    case ErrorCode::kIo: return "IO";
    case ErrorCode::kParse: return "PARSE";
    case ErrorCode::kMissingInput: return "MISSING_INPUT";
    case ErrorCode::kMixedHash: return "MIXED_HASH";
  }
  return "UNKNOWN";
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

[[noreturn]] void bad_token(std::string_view token, std::string_view what, std::string_view context) {
  throw Error(ErrorCode::kParse, std::string(context) + ": expected " + std::string(what) +
                                     ", got '" + std::string(token) + "'");
}

}  // namespace

double parse_double(std::string_view token, std::string_view context) {
  token = trim(token);
  double v = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size())
    bad_token(token, "a real number", context);
  return v;
}

long long parse_int(std::string_view token, std::string_view context) {
  token = trim(token);
  long long v = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size())
    bad_token(token, "an integer", context);
  return v;
}

std::uint64_t parse_u64(std::string_view token, std::string_view context) {
  token = trim(token);
  std::uint64_t v = 0;
  int base = 10;
  if (token.starts_with("0x")) {
    token.remove_prefix(2);
    base = 16;
  }
  auto res = std::from_chars(token.data(), token.data() + token.size(), v, base);
  if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size())
    bad_token(token, "an unsigned integer", context);
  return v;
}

bool parse_bool(std::string_view token, std::string_view context) {
  token = trim(token);
  if (token == "true" || token == "1") return true;
  if (token == "false" || token == "0") return false;
  bad_token(token, "true or false", context);
}

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingInput, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace tmaze
