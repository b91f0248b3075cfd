#include "io.hpp"

#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "error.hpp"

namespace ufg {

void atomic_write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw_io("cannot write file: " + tmp.string());
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw_io("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw_io("cannot rename " + tmp.string() + " -> " + path + ": " +
                   ec.message());
}

namespace {

void appendf(std::string& out, const char* fmt, ...) {
  char buf[256];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, ap);
  va_end(ap);
  out += buf;
}

template <typename T>
void put_le(std::string& out, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(reinterpret_cast<char*>(buf), sizeof(T));
}

}  // namespace

std::string format_metrics_csv(const std::vector<RoundMetrics>& rounds) {
  std::string out = "round,loss,hr10,ndcg10,graph_rebuilt,upload_floats\n";
  for (const auto& r : rounds)
    appendf(out, "%zu,%.6f,%.6f,%.6f,%u,%zu\n", r.round, r.loss, r.hr10,
            r.ndcg10, r.graph_rebuilt ? 1u : 0u, r.upload_floats);
  return out;
}

std::string format_graph_dump_tsv(const std::vector<GraphDumpRow>& rows) {
  std::string out = "round\tuser_i\tuser_j\tsimilarity\n";
  for (const auto& r : rows)
    appendf(out, "%zu\t%u\t%u\t%.12f\n", r.round, r.user_i, r.user_j,
            r.similarity);
  return out;
}

std::string format_snapshot(const std::vector<ClientModelParams>& clients) {
  // Layout: "UFGSNAP1" magic, u32 client count, then per client a u32 id,
  // u32 tensor count, and per tensor u16 name length + name, u64 rows,
  // u64 cols, rows*cols little-endian doubles.
  std::string out = "UFGSNAP1";
  put_le<uint32_t>(out, static_cast<uint32_t>(clients.size()));
  for (std::size_t c = 0; c < clients.size(); ++c) {
    put_le<uint32_t>(out, static_cast<uint32_t>(c));
    std::size_t tensors = 0;
    clients[c].for_each_tensor([&](const char*, const Matrix&) { ++tensors; });
    put_le<uint32_t>(out, static_cast<uint32_t>(tensors));
    clients[c].for_each_tensor([&](const char* name, const Matrix& m) {
      const std::size_t len = std::strlen(name);
      put_le<uint16_t>(out, static_cast<uint16_t>(len));
      out.append(name, len);
      put_le<uint64_t>(out, m.rows());
      put_le<uint64_t>(out, m.cols());
      for (std::size_t i = 0; i < m.size(); ++i)
        put_le<double>(out, m.data()[i]);
    });
  }
  return out;
}

}  // namespace ufg
