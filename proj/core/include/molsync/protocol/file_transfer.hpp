#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "molsync/protocol/envelope.hpp"
#include "molsync/protocol/result.hpp"

namespace molsync {

inline constexpr std::size_t kDefaultChunkSize = 16384;
inline constexpr std::size_t kFileIdLength = 16;

using Bytes = std::vector<std::uint8_t>;

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string base64_encode(std::span<const std::uint8_t> bytes);
std::optional<Bytes> base64_decode(std::string_view text);

struct ChunkedFile {
  FileManifest manifest;
  std::vector<FileChunk> chunks;
};

// Splits `bytes` into ceil(size / chunk_size) chunks. chunk_size must be >= 1.
ChunkedFile chunk_file(std::span<const std::uint8_t> bytes, std::string file_id,
                       std::string name, std::size_t chunk_size = kDefaultChunkSize);

enum class FileErrorCode { missing_chunks, digest_mismatch, unknown_file_id };

std::string_view file_error_name(FileErrorCode code) noexcept;

struct FileError {
  FileErrorCode code = FileErrorCode::missing_chunks;
  std::vector<std::uint64_t> missing;  // ascending, for missing_chunks
  std::string detail;
};

// Incremental receiver for one transfer. Duplicate chunks are ignored.
class FileAssembler {
 public:
  explicit FileAssembler(FileManifest manifest);

  const FileManifest& manifest() const noexcept { return manifest_; }

  // unknown_file_id when the chunk belongs to another transfer. Chunks whose
  // index lies outside the manifest are ignored.
  std::optional<FileError> add(const FileChunk& chunk);

  bool complete() const noexcept { return chunks_.size() == manifest_.chunk_count; }
  std::size_t received() const noexcept { return chunks_.size(); }
  std::vector<std::uint64_t> missing() const;

  Result<Bytes, FileError> finish() const;

 private:
  FileManifest manifest_;
  std::map<std::uint64_t, Bytes> chunks_;
};

// Chunks may be in any order and contain duplicates.
Result<Bytes, FileError> reassemble(const FileManifest& manifest,
                                    std::span<const FileChunk> chunks);

}  // namespace molsync
