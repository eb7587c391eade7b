#include "maclab/pmlb.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <string_view>
#include <system_error>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"
#include "maclab/error.hpp"
#include <openssl/evp.h>
#include <zlib.h>

namespace maclab {

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorCode::io_error, "sha-256 digest failed");
  }
  static const char hex[] = "0123456789abcdef";
  std::string out(2 * len, '0');
  for (unsigned int i = 0; i < len; ++i) {
    out[2 * i] = hex[md[i] >> 4];
    out[2 * i + 1] = hex[md[i] & 0xf];
  }
  return out;
}

std::string gzip_compress(const std::string& text) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, 15 + 16, 8,
                   Z_DEFAULT_STRATEGY) != Z_OK) {
    throw Error(ErrorCode::io_error, "zlib deflate init failed");
  }
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(text.data()));
  zs.avail_in = static_cast<uInt>(text.size());
  std::string out;
  char buf[1 << 16];
  int rc = Z_OK;
  do {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof buf;
    rc = deflate(&zs, Z_FINISH);
    if (rc == Z_STREAM_ERROR) {
      deflateEnd(&zs);
      throw Error(ErrorCode::io_error, "zlib deflate failed");
    }
    out.append(buf, sizeof buf - zs.avail_out);
  } while (rc != Z_STREAM_END);
  deflateEnd(&zs);
  return out;
}

std::string gzip_decompress(const std::string& bytes) {
  z_stream zs{};
  if (inflateInit2(&zs, 15 + 16) != Z_OK) {
    throw Error(ErrorCode::io_error, "zlib inflate init failed");
  }
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
  zs.avail_in = static_cast<uInt>(bytes.size());
  std::string out;
  char buf[1 << 16];
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof buf;
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw Error(ErrorCode::corrupt_cache, "gzip stream is damaged");
    }
    out.append(buf, sizeof buf - zs.avail_out);
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      throw Error(ErrorCode::corrupt_cache, "gzip stream is truncated");
    }
  }
  inflateEnd(&zs);
  return out;
}

namespace {

class HttpTransport final : public Transport {
 public:
  std::string get(const std::string& url) override {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
      throw Error(ErrorCode::fetch_failed, "unsupported url " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string origin =
        path_start == std::string::npos ? url : url.substr(0, path_start);
    const std::string path =
        path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(origin);
    client.set_follow_location(true);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);
    auto res = client.Get(path);
    if (!res) {
      throw Error(ErrorCode::fetch_failed,
                  "request failed for " + url + ": " +
                      httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw Error(ErrorCode::fetch_failed,
                  "http " + std::to_string(res->status) + " for " + url);
    }
    return res->body;
  }
};

bool looks_gzip(const std::string& bytes) {
  return bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1f &&
         static_cast<unsigned char>(bytes[1]) == 0x8b;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::io_error, "cannot read " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Write-temp-then-rename so concurrent readers never observe a partial file.
void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
  static std::atomic<unsigned> counter{0};
  std::filesystem::path temp = path;
  temp += ".tmp" + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(bytes.data(),
                           static_cast<std::streamsize>(bytes.size()))) {
      throw Error(ErrorCode::io_error, "cannot write " + temp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) {
    std::filesystem::remove(temp, ec);
    throw Error(ErrorCode::io_error, "cannot move " + temp.string() +
                                         " into place: " + ec.message());
  }
}

// Guards manifest.json read-modify-write cycles; dataset files themselves
// are safe through atomic_write alone.
std::mutex cache_mutex;

std::filesystem::path manifest_path(const std::filesystem::path& cache_dir) {
  return cache_dir / "manifest.json";
}

nlohmann::json read_manifest_locked(const std::filesystem::path& cache_dir) {
  const auto path = manifest_path(cache_dir);
  if (!std::filesystem::exists(path)) {
    return {{"version", 1}, {"datasets", nlohmann::json::object()}};
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::corrupt_cache,
                "manifest.json is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object() || !j.contains("datasets") ||
      !j["datasets"].is_object()) {
    throw Error(ErrorCode::corrupt_cache,
                "manifest.json is missing the datasets table");
  }
  return j;
}

void write_manifest_locked(const std::filesystem::path& cache_dir,
                           const nlohmann::json& j) {
  atomic_write(manifest_path(cache_dir), j.dump(2) + "\n");
}

nlohmann::json pin_entry(const DatasetManifest& entry,
                         const std::string& checksum) {
  return {{"checksum", checksum},
          {"rows", entry.rows},
          {"features", entry.features},
          {"url", entry.url}};
}

}  // namespace

std::unique_ptr<Transport> make_http_transport() {
  return std::make_unique<HttpTransport>();
}

std::filesystem::path fetch(const std::string& name,
                            const std::filesystem::path& cache_dir,
                            Transport& transport) {
  const DatasetManifest* entry = find_dataset(name);
  if (!entry) {
    throw Error(ErrorCode::fetch_failed, "unknown dataset '" + name + "'");
  }
  std::error_code ec;
  std::filesystem::create_directories(cache_dir, ec);
  if (ec) {
    throw Error(ErrorCode::io_error,
                "cannot create cache dir " + cache_dir.string());
  }
  const std::filesystem::path file = cache_dir / (name + ".tsv.gz");

  {
    std::scoped_lock lock(cache_mutex);
    if (std::filesystem::exists(file)) {
      const std::string sum = sha256_hex(read_file(file));
      nlohmann::json manifest = read_manifest_locked(cache_dir);
      auto& datasets = manifest["datasets"];
      if (datasets.contains(name)) {
        if (datasets[name].value("checksum", "") != sum) {
          throw Error(ErrorCode::corrupt_cache,
                      "checksum mismatch for " + name +
                          ": cached file does not match the pin");
        }
      } else {
        datasets[name] = pin_entry(*entry, sum);
        write_manifest_locked(cache_dir, manifest);
      }
      return file;
    }
  }

  // Cold cache. The download runs outside the lock so distinct datasets can
  // fetch concurrently.
  std::string body;
  try {
    body = transport.get(entry->url);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::fetch_failed,
                "download failed for " + name + ": " + e.what());
  }
  if (!looks_gzip(body)) {
    throw Error(ErrorCode::fetch_failed,
                "server did not return a gzip file for " + name);
  }
  const std::string sum = sha256_hex(body);

  std::scoped_lock lock(cache_mutex);
  nlohmann::json manifest = read_manifest_locked(cache_dir);
  auto& datasets = manifest["datasets"];
  if (datasets.contains(name) && datasets[name].value("checksum", "") != sum) {
    throw Error(ErrorCode::corrupt_cache,
                "checksum mismatch for " + name +
                    ": download does not match the pin");
  }
  atomic_write(file, body);
  datasets[name] = pin_entry(*entry, sum);
  write_manifest_locked(cache_dir, manifest);
  return file;
}

std::filesystem::path fetch(const std::string& name,
                            const std::filesystem::path& cache_dir) {
  auto transport = make_http_transport();
  return fetch(name, cache_dir, *transport);
}

namespace {

std::vector<std::string_view> split_lines(const std::string& text) {
  std::vector<std::string_view> lines;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    std::string_view line =
        nl == std::string_view::npos ? rest : rest.substr(0, nl);
    if (line.ends_with('\r')) line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    rest.remove_prefix(nl + 1);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cells;
  for (;;) {
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      cells.push_back(line);
      return cells;
    }
    cells.push_back(line.substr(0, tab));
    line.remove_prefix(tab + 1);
  }
}

double parse_cell(std::string_view cell, std::size_t file_line,
                  std::string_view column) {
  double value = 0.0;
  const auto [end, errc] =
      std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (errc != std::errc{} || end != cell.data() + cell.size()) {
    throw Error(ErrorCode::bad_format,
                "line " + std::to_string(file_line) + ", column '" +
                    std::string(column) + "': '" + std::string(cell) +
                    "' is not a number");
  }
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::bad_format,
                "line " + std::to_string(file_line) + ", column '" +
                    std::string(column) + "': non-finite value '" +
                    std::string(cell) + "'");
  }
  return value;
}

}  // namespace

Dataset parse(const std::filesystem::path& path) {
  std::string text = read_file(path);
  if (looks_gzip(text)) text = gzip_decompress(text);

  const auto lines = split_lines(text);
  if (lines.empty()) {
    throw Error(ErrorCode::bad_format, path.string() + " is empty");
  }
  const auto header = split_tabs(lines[0]);
  std::size_t target_col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] != "target") continue;
    if (target_col != header.size()) {
      throw Error(ErrorCode::bad_format,
                  path.string() + " has more than one target column");
    }
    target_col = c;
  }
  if (target_col == header.size()) {
    throw Error(ErrorCode::bad_format,
                path.string() + " has no target column");
  }
  if (header.size() < 2) {
    throw Error(ErrorCode::bad_format,
                path.string() + " has no feature columns");
  }
  if (lines.size() < 2) {
    throw Error(ErrorCode::too_few_rows,
                path.string() + " has a header but no data rows");
  }

  const auto n = static_cast<Eigen::Index>(lines.size() - 1);
  const auto width = static_cast<Eigen::Index>(header.size() - 1);
  Dataset out;
  out.features.resize(n, width);
  out.target.resize(n);
  out.feature_names.reserve(header.size() - 1);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != target_col) out.feature_names.emplace_back(header[c]);
  }

  for (std::size_t row = 1; row < lines.size(); ++row) {
    const auto cells = split_tabs(lines[row]);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::bad_format,
                  "line " + std::to_string(row + 1) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    }
    Eigen::Index feature = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double value = parse_cell(cells[c], row + 1, header[c]);
      if (c == target_col) {
        out.target(static_cast<Eigen::Index>(row - 1)) = value;
      } else {
        out.features(static_cast<Eigen::Index>(row - 1), feature++) = value;
      }
    }
  }
  return out;
}

Dataset load_dataset(const std::string& name,
                     const std::filesystem::path& cache_dir,
                     Transport& transport) {
  return parse(fetch(name, cache_dir, transport));
}

std::map<std::string, std::string> read_pinned_checksums(
    const std::filesystem::path& cache_dir) {
  std::scoped_lock lock(cache_mutex);
  std::map<std::string, std::string> out;
  if (!std::filesystem::exists(manifest_path(cache_dir))) return out;
  const nlohmann::json manifest = read_manifest_locked(cache_dir);
  for (const auto& [name, entry] : manifest.at("datasets").items()) {
    out[name] = entry.value("checksum", "");
  }
  return out;
}

std::vector<DatasetManifest> cached_corpus(
    const std::filesystem::path& cache_dir) {
  std::vector<DatasetManifest> out;
  for (const auto& [name, checksum] : read_pinned_checksums(cache_dir)) {
    const DatasetManifest* entry = find_dataset(name);
    if (!entry) continue;
    const std::filesystem::path file = cache_dir / (name + ".tsv.gz");
    if (!std::filesystem::exists(file)) continue;
    DatasetManifest m = *entry;
    m.cache_path = file;
    m.checksum = checksum;
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace maclab
