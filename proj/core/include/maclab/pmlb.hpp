#ifndef MACLAB_PMLB_HPP
#define MACLAB_PMLB_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "maclab/data.hpp"

namespace maclab {

/// One corpus entry. `rows` and `features` are the counts recorded when the
/// catalog snapshot was taken and drive the row-cap filter; `cache_path`
/// and `checksum` stay empty until the file has been fetched and pinned.
struct DatasetManifest {
  std::string name;
  std::int64_t rows = 0;
  int features = 0;
  std::string url;
  std::filesystem::path cache_path;
  std::string checksum;  // hex SHA-256 of the gzip file
};

/// Full regression catalog, sorted by name.
const std::vector<DatasetManifest>& catalog();

/// Catalog entries with fewer than `max_rows` rows, sorted by name.
std::vector<DatasetManifest> corpus(std::int64_t max_rows);

/// nullptr when the name is not in the catalog.
const DatasetManifest* find_dataset(const std::string& name);

/// Byte transport behind fetch: the default client talks HTTPS, tests swap
/// in stubs.
class Transport {
 public:
  virtual ~Transport() = default;

  /// Whole response body, or fetch-failed.
  virtual std::string get(const std::string& url) = 0;
};

std::unique_ptr<Transport> make_http_transport();

/// Ensures DIR/<name>.tsv.gz exists and matches its pinned checksum, then
/// returns that path. The first successful download pins the checksum in
/// DIR/manifest.json; later calls verify against the pin and touch the
/// network only when the file is missing.
/// Errors: unknown name or download failure -> fetch-failed; disagreement
/// with the pinned checksum -> corrupt-cache.
std::filesystem::path fetch(const std::string& name,
                            const std::filesystem::path& cache_dir,
                            Transport& transport);
std::filesystem::path fetch(const std::string& name,
                            const std::filesystem::path& cache_dir);

/// Reads a tab-separated file (gzip or plain, detected by magic bytes) with
/// a `target` header column into a Dataset. Anything in the grid that is
/// not a finite real is bad-format with the offending line and column named.
Dataset parse(const std::filesystem::path& path);

/// parse(fetch(name, cache_dir, transport)).
Dataset load_dataset(const std::string& name,
                     const std::filesystem::path& cache_dir,
                     Transport& transport);

/// Checksums pinned in DIR/manifest.json, keyed by dataset name. A missing
/// manifest reads as empty.
std::map<std::string, std::string> read_pinned_checksums(
    const std::filesystem::path& cache_dir);

/// Catalog entries whose files are pinned and present in the cache, with
/// `cache_path` and `checksum` filled in. Sorted by name.
std::vector<DatasetManifest> cached_corpus(
    const std::filesystem::path& cache_dir);

std::string gzip_compress(const std::string& text);
std::string gzip_decompress(const std::string& bytes);
std::string sha256_hex(const std::string& bytes);

}  // namespace maclab

#endif  // MACLAB_PMLB_HPP
