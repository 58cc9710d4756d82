#include "molsync/protocol/file_transfer.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <stdexcept>

namespace molsync {

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0x0F]);
  }
  return out;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::optional<Bytes> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) return std::nullopt;
  if (text.empty()) return Bytes{};
  // EVP_DecodeBlock skips surrounding whitespace; the wire form has none.
  for (char c : text) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                    c == '+' || c == '/' || c == '=';
    if (!ok) return std::nullopt;
  }
  const std::size_t pad = text.ends_with("==") ? 2 : text.ends_with('=') ? 1 : 0;
  if (std::find(text.begin(), text.end() - static_cast<std::ptrdiff_t>(pad), '=') !=
      text.end() - static_cast<std::ptrdiff_t>(pad)) {
    return std::nullopt;
  }
  Bytes out(3 * (text.size() / 4));
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) return std::nullopt;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

ChunkedFile chunk_file(std::span<const std::uint8_t> bytes, std::string file_id, std::string name,
                       std::size_t chunk_size) {
  if (chunk_size == 0) throw std::invalid_argument("chunk_size must be >= 1");
  ChunkedFile out;
  const std::size_t count = (bytes.size() + chunk_size - 1) / chunk_size;
  out.manifest = FileManifest{file_id, std::move(name), bytes.size(), chunk_size, count,
                              sha256_hex(bytes)};
  out.chunks.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto part = bytes.subspan(i * chunk_size, std::min(chunk_size, bytes.size() - i * chunk_size));
    out.chunks.push_back(FileChunk{file_id, i, Bytes(part.begin(), part.end())});
  }
  return out;
}

std::string_view file_error_name(FileErrorCode code) noexcept {
  switch (code) {
    case FileErrorCode::missing_chunks: return "missing_chunks";
    case FileErrorCode::digest_mismatch: return "digest_mismatch";
    case FileErrorCode::unknown_file_id: return "unknown_file_id";
  }
  return "missing_chunks";
}

FileAssembler::FileAssembler(FileManifest manifest) : manifest_(std::move(manifest)) {}

std::optional<FileError> FileAssembler::add(const FileChunk& chunk) {
  if (chunk.file_id != manifest_.file_id) {
    return FileError{FileErrorCode::unknown_file_id, {}, "chunk for file '" + chunk.file_id + "'"};
  }
  if (chunk.index >= manifest_.chunk_count) return std::nullopt;
  chunks_.try_emplace(chunk.index, chunk.data);
  return std::nullopt;
}

std::vector<std::uint64_t> FileAssembler::missing() const {
  std::vector<std::uint64_t> out;
  for (std::uint64_t i = 0; i < manifest_.chunk_count; ++i) {
    if (!chunks_.contains(i)) out.push_back(i);
  }
  return out;
}

Result<Bytes, FileError> FileAssembler::finish() const {
  if (!complete()) {
    return FileError{FileErrorCode::missing_chunks, missing(), "transfer incomplete"};
  }
  Bytes out;
  out.reserve(manifest_.total_bytes);
  for (const auto& [index, data] : chunks_) out.insert(out.end(), data.begin(), data.end());
  if (out.size() != manifest_.total_bytes || sha256_hex(out) != manifest_.digest) {
    return FileError{FileErrorCode::digest_mismatch, {}, "reassembled content does not match digest"};
  }
  return out;
}

Result<Bytes, FileError> reassemble(const FileManifest& manifest, std::span<const FileChunk> chunks) {
  FileAssembler assembler(manifest);
  for (const FileChunk& c : chunks) {
    if (auto err = assembler.add(c)) return std::move(*err);
  }
  return assembler.finish();
}

}  // namespace molsync
