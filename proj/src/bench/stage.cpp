#include "stripefs/bench/stage.hpp"

#include <chrono>
#include <fstream>

#include "stripefs/bench/digest.hpp"

namespace stripefs::bench {

StageResult stage_copy(client::Client& client, const std::filesystem::path& src, const std::string& dst,
                       const StageOptions& options) {
  if (options.chunk == 0) raise(Errc::config, "chunk size must be positive");
  std::ifstream in(src, std::ios::binary);
  if (!in) raise(Errc::storage, "cannot read " + src.string());

  try {
    client.remove(dst);
  } catch (const Error& e) {
    if (e.code() != Errc::no_such_file) throw;
  }
  auto h = client.create(dst, options.dist);

  StageResult result;
  const auto t0 = std::chrono::steady_clock::now();
  Sha256 source;
  Bytes buf(options.chunk);
  for (;;) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    const auto n = static_cast<std::uint64_t>(in.gcount());
    if (n == 0) break;
    ByteView chunk(buf.data(), n);
    source.update(chunk);
    client.write_at(h, result.bytes, chunk);
    result.bytes += n;
  }
  if (in.bad()) raise(Errc::storage, "error reading " + src.string());
  client.close(h);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.digest = to_hex(source.finish());

  h = client.open(dst);
  Sha256 back;
  for (std::uint64_t off = 0; off < result.bytes; off += options.chunk) {
    back.update(client.read_at(h, off, options.chunk));
  }
  client.close(h);
  if (to_hex(back.finish()) != result.digest) raise(Errc::integrity, dst + ": read-back digest differs from " + src.string());

  double rate = 0.0;
  if (options.source_bps > 0 && options.network_bps > 0) {
    rate = std::min(options.source_bps, options.network_bps);
  } else {
    rate = std::max(options.source_bps, options.network_bps);
  }
  if (rate > 0) result.modeled_seconds = static_cast<double>(result.bytes) / rate;
  return result;
}

}  // namespace stripefs::bench
