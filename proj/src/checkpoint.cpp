#include "streamrec/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace streamrec::ckpt {

namespace {

constexpr char magic[8] = {'S', 'R', 'E', 'C', 'C', 'K', 'P', 'T'};

std::uint32_t crc32(const unsigned char* p, std::size_t n) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k)
        c = (c & 1u) ? 0xedb88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t c = 0xffffffffu;
  for (std::size_t i = 0; i < n; ++i)
    c = table[(c ^ p[i]) & 0xffu] ^ (c >> 8);
  return c ^ 0xffffffffu;
}

// byte-level little-endian writers, host-endianness independent
void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}
void put_f64(std::string& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}
std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}
double get_f64(const unsigned char* p) {
  return std::bit_cast<double>(get_u64(p));
}

void put_matrix(std::string& out, const Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) put_f64(out, m(i, j));
}

nlohmann::ordered_json ids_json(const IdMap& map) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (std::int64_t id : map.ids()) arr.push_back(id);
  return arr;
}

nlohmann::ordered_json array_entry(const std::string& name,
                                   const std::vector<Index>& dims,
                                   std::uint64_t& offset) {
  nlohmann::ordered_json e;
  e["name"] = name;
  e["dims"] = dims;
  e["offset"] = offset;
  std::uint64_t count = 1;
  for (Index d : dims) count *= static_cast<std::uint64_t>(d);
  offset += count * 8;
  return e;
}

void write_file(const std::string& path, const nlohmann::ordered_json& header,
                const std::string& payload) {
  std::string buf(magic, sizeof magic);
  put_u32(buf, format_version);
  const std::string hdr = header.dump();
  put_u64(buf, hdr.size());
  buf += hdr;
  buf += payload;
  put_u32(buf, crc32(reinterpret_cast<const unsigned char*>(buf.data()),
                     buf.size()));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!f) throw std::runtime_error("write failed on '" + path + "'");
}

struct Parsed {
  nlohmann::ordered_json header;
  std::string payload;
};

Parsed read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string buf = ss.str();
  const auto* bytes = reinterpret_cast<const unsigned char*>(buf.data());

  if (buf.size() < sizeof magic + 4 + 8 + 4)
    throw std::runtime_error("'" + path + "' is truncated: " +
                             std::to_string(buf.size()) + " bytes");
  if (buf.compare(0, sizeof magic, magic, sizeof magic) != 0)
    throw std::runtime_error("'" + path + "' is not a checkpoint file");
  const std::uint32_t version = get_u32(bytes + 8);
  if (version != format_version)
    throw std::runtime_error("'" + path + "' has checkpoint version " +
                             std::to_string(version) + ", this build reads " +
                             std::to_string(format_version));
  const std::uint64_t hdr_len = get_u64(bytes + 12);
  const std::size_t body = 20;
  if (hdr_len > buf.size() || body + hdr_len + 4 > buf.size())
    throw std::runtime_error("'" + path +
                             "' is truncated: header does not fit");
  const std::uint32_t stored = get_u32(bytes + buf.size() - 4);
  const std::uint32_t actual = crc32(bytes, buf.size() - 4);
  if (stored != actual)
    throw std::runtime_error("'" + path +
                             "' failed its integrity check (truncated or "
                             "corrupted)");

  Parsed out;
  try {
    out.header = nlohmann::ordered_json::parse(
        buf.begin() + static_cast<std::ptrdiff_t>(body),
        buf.begin() + static_cast<std::ptrdiff_t>(body + hdr_len));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("'" + path + "' has a corrupt header: " +
                             e.what());
  }
  out.payload = buf.substr(body + hdr_len, buf.size() - 4 - body - hdr_len);
  return out;
}

IdMap map_from(const nlohmann::ordered_json& arr) {
  IdMap map;
  for (const auto& id : arr) map.add(id.get<std::int64_t>());
  return map;
}

const nlohmann::ordered_json& find_array(const nlohmann::ordered_json& header,
                                         const std::string& name) {
  for (const auto& e : header.at("arrays"))
    if (e.at("name") == name) return e;
  throw std::runtime_error("checkpoint header lists no array '" + name + "'");
}

void check_span(const nlohmann::ordered_json& entry, std::uint64_t count,
                const std::string& payload) {
  const auto offset = entry.at("offset").get<std::uint64_t>();
  if (offset + count * 8 > payload.size())
    throw std::runtime_error("checkpoint payload is shorter than array '" +
                             entry.at("name").get<std::string>() + "' needs");
}

Matrix read_matrix(const nlohmann::ordered_json& header,
                   const std::string& payload, const std::string& name) {
  const auto& entry = find_array(header, name);
  const auto& dims = entry.at("dims");
  if (dims.size() != 2)
    throw std::runtime_error("array '" + name + "' is not a matrix");
  const auto rows = dims[0].get<Index>();
  const auto cols = dims[1].get<Index>();
  check_span(entry, static_cast<std::uint64_t>(rows) * cols, payload);
  const auto* p = reinterpret_cast<const unsigned char*>(payload.data()) +
                  entry.at("offset").get<std::uint64_t>();
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i, p += 8) m(i, j) = get_f64(p);
  return m;
}

Tensor3 read_tensor(const nlohmann::ordered_json& header,
                    const std::string& payload, const std::string& name) {
  const auto& entry = find_array(header, name);
  const auto& dims = entry.at("dims");
  if (dims.size() != 3)
    throw std::runtime_error("array '" + name + "' is not an order-3 tensor");
  Tensor3 t(dims[0].get<Index>(), dims[1].get<Index>(), dims[2].get<Index>());
  check_span(entry, static_cast<std::uint64_t>(t.size()), payload);
  const auto* p = reinterpret_cast<const unsigned char*>(payload.data()) +
                  entry.at("offset").get<std::uint64_t>();
  for (Index i = 0; i < t.size(); ++i, p += 8) t.raw()[i] = get_f64(p);
  return t;
}

}  // namespace

void save(const SvdState& st, const std::string& path,
          const nlohmann::ordered_json& config) {
  nlohmann::ordered_json h;
  h["state"] = "svd";
  h["rank"] = st.rank;
  h["users"] = ids_json(st.users);
  h["items"] = ids_json(st.items);
  std::uint64_t offset = 0;
  h["arrays"] = nlohmann::ordered_json::array(
      {array_entry("u", {st.u.rows(), st.u.cols()}, offset),
       array_entry("s", {st.s.rows(), st.s.cols()}, offset),
       array_entry("v", {st.v.rows(), st.v.cols()}, offset)});
  h["config"] = config;

  std::string payload;
  payload.reserve(offset);
  put_matrix(payload, st.u);
  put_matrix(payload, st.s);
  put_matrix(payload, st.v);
  write_file(path, h, payload);
}

void save(const TuckerState& st, const std::string& path,
          const nlohmann::ordered_json& config) {
  nlohmann::ordered_json h;
  h["state"] = "tucker";
  h["ranks"] = st.ranks;
  h["attention"] = {{"length", st.attention.length},
                    {"decay", st.attention.decay}};
  h["users"] = ids_json(st.users);
  h["items"] = ids_json(st.items);
  std::uint64_t offset = 0;
  h["arrays"] = nlohmann::ordered_json::array(
      {array_entry("u1", {st.u1.rows(), st.u1.cols()}, offset),
       array_entry("u2", {st.u2.rows(), st.u2.cols()}, offset),
       array_entry("u3", {st.u3.rows(), st.u3.cols()}, offset),
       array_entry("core",
                   {st.core.dim(0), st.core.dim(1), st.core.dim(2)}, offset)});
  h["config"] = config;

  std::string payload;
  payload.reserve(offset);
  put_matrix(payload, st.u1);
  put_matrix(payload, st.u2);
  put_matrix(payload, st.u3);
  for (Index i = 0; i < st.core.size(); ++i) put_f64(payload, st.core.raw()[i]);
  write_file(path, h, payload);
}

SvdLoad load_svd(const std::string& path) {
  Parsed in = read_file(path);
  const auto state = in.header.at("state").get<std::string>();
  if (state != "svd")
    throw std::runtime_error("'" + path + "' holds a " + state +
                             " state, expected svd");
  SvdLoad out;
  out.state.users = map_from(in.header.at("users"));
  out.state.items = map_from(in.header.at("items"));
  out.state.rank = in.header.at("rank").get<Index>();
  out.state.u = read_matrix(in.header, in.payload, "u");
  out.state.s = read_matrix(in.header, in.payload, "s");
  out.state.v = read_matrix(in.header, in.payload, "v");
  out.config = in.header.at("config");
  return out;
}

TuckerLoad load_tucker(const std::string& path) {
  Parsed in = read_file(path);
  const auto state = in.header.at("state").get<std::string>();
  if (state != "tucker")
    throw std::runtime_error("'" + path + "' holds a " + state +
                             " state, expected tucker");
  TuckerLoad out;
  out.state.users = map_from(in.header.at("users"));
  out.state.items = map_from(in.header.at("items"));
  const auto& ranks = in.header.at("ranks");
  for (int m = 0; m < 3; ++m) out.state.ranks[m] = ranks.at(m).get<Index>();
  out.state.attention.length =
      in.header.at("attention").at("length").get<Index>();
  out.state.attention.decay =
      in.header.at("attention").at("decay").get<double>();
  out.state.u1 = read_matrix(in.header, in.payload, "u1");
  out.state.u2 = read_matrix(in.header, in.payload, "u2");
  out.state.u3 = read_matrix(in.header, in.payload, "u3");
  out.state.core = read_tensor(in.header, in.payload, "core");
  out.config = in.header.at("config");
  return out;
}

nlohmann::ordered_json read_header(const std::string& path) {
  return read_file(path).header;
}

}  // namespace streamrec::ckpt
