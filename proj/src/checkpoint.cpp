#include "relab/logging/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include "relab/error.hpp"

namespace relab::logging {
namespace {

constexpr char kMagic[8] = {'R', 'E', 'L', 'A', 'B', 'C', 'K', 'P'};
static_assert(kCheckpointTimeOffset == sizeof(kMagic) + sizeof(std::uint32_t),
              "wall time sits directly after magic and format version");
static_assert(kCheckpointTimeSize == sizeof(std::int64_t));

void put_u32(std::string& out, std::uint32_t v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_u64(std::string& out, std::uint64_t v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_i64(std::string& out, std::int64_t v) { put_u64(out, static_cast<std::uint64_t>(v)); }

void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  put_u64(out, bits);
}

void put_str(std::string& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

void put_matrix(std::string& out, const nn::Matrix& m) {
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  const auto n = static_cast<std::size_t>(m.rows()) * static_cast<std::size_t>(m.cols());
  out.append(reinterpret_cast<const char*>(m.data()), n * sizeof(double));
}

struct Cursor {
  const std::string& buf;
  std::string where;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw FileError("checkpoint '" + where + "' is truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v;
    std::memcpy(&v, buf.data() + pos, 4);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v;
    std::memcpy(&v, buf.data() + pos, 8);
    pos += 8;
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
  nn::Matrix matrix() {
    const auto rows = static_cast<int>(u32());
    const auto cols = static_cast<int>(u32());
    const auto n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    need(n * sizeof(double));
    nn::Matrix m(rows, cols);
    std::memcpy(m.data(), buf.data() + pos, n * sizeof(double));
    pos += n * sizeof(double);
    return m;
  }
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open checkpoint '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

CheckpointInfo read_header(Cursor& c) {
  c.need(sizeof kMagic);
  if (std::memcmp(c.buf.data(), kMagic, sizeof kMagic) != 0)
    throw CompatibilityError("'" + c.where + "' is not a checkpoint file");
  c.pos = sizeof kMagic;

  CheckpointInfo info;
  info.format_version = c.u32();
  if (info.format_version != kCheckpointVersion)
    throw CompatibilityError("checkpoint '" + c.where + "' has format version " +
                             std::to_string(info.format_version) + "; this build reads version " +
                             std::to_string(kCheckpointVersion));
  info.wall_time_ms = c.i64();
  info.step = static_cast<long>(c.i64());
  info.agent_name = c.str();
  return info;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const std::string& agent_name,
                     long step, const StateMap& state, const Clock& clock) {
  std::string out;
  out.append(kMagic, sizeof kMagic);
  put_u32(out, kCheckpointVersion);
  put_i64(out, clock.now_ms());
  put_i64(out, static_cast<std::int64_t>(step));
  put_str(out, agent_name);

  put_u32(out, static_cast<std::uint32_t>(state.sections.size()));
  for (const auto& [name, mats] : state.sections) {
    put_str(out, name);
    put_u32(out, static_cast<std::uint32_t>(mats.size()));
    for (const auto& m : mats) put_matrix(out, m);
  }
  put_u32(out, static_cast<std::uint32_t>(state.scalars.size()));
  for (const auto& [name, v] : state.scalars) {
    put_str(out, name);
    put_f64(out, v);
  }
  put_u32(out, static_cast<std::uint32_t>(state.rngs.size()));
  for (const auto& [name, s] : state.rngs) {
    put_str(out, name);
    for (const std::uint64_t word : s) put_u64(out, word);
  }

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw FileError("cannot open '" + tmp.string() + "' for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw FileError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw FileError("cannot move checkpoint into place at '" + path.string() +
                    "': " + ec.message());
}

CheckpointInfo peek_checkpoint(const std::filesystem::path& path) {
  const std::string buf = read_file(path);
  Cursor c{buf, path.string()};
  return read_header(c);
}

StateMap load_checkpoint(const std::filesystem::path& path, const std::string& expected_agent,
                         CheckpointInfo* info) {
  const std::string buf = read_file(path);
  Cursor c{buf, path.string()};
  const CheckpointInfo header = read_header(c);
  if (!expected_agent.empty() && header.agent_name != expected_agent)
    throw CompatibilityError("checkpoint '" + path.string() + "' was saved by agent '" +
                             header.agent_name + "', not '" + expected_agent + "'");

  StateMap state;
  const std::uint32_t n_sections = c.u32();
  for (std::uint32_t i = 0; i < n_sections; ++i) {
    std::string name = c.str();
    const std::uint32_t n_mats = c.u32();
    std::vector<nn::Matrix> mats;
    mats.reserve(n_mats);
    for (std::uint32_t k = 0; k < n_mats; ++k) mats.push_back(c.matrix());
    state.sections.emplace(std::move(name), std::move(mats));
  }
  const std::uint32_t n_scalars = c.u32();
  for (std::uint32_t i = 0; i < n_scalars; ++i) {
    std::string name = c.str();
    state.scalars.emplace(std::move(name), c.f64());
  }
  const std::uint32_t n_rngs = c.u32();
  for (std::uint32_t i = 0; i < n_rngs; ++i) {
    std::string name = c.str();
    Rng::State s{};
    for (auto& word : s) word = c.u64();
    state.rngs.emplace(std::move(name), s);
  }
  if (c.pos != buf.size())
    throw FileError("checkpoint '" + path.string() + "' has trailing bytes");

  if (info) *info = header;
  return state;
}

}  // namespace relab::logging
