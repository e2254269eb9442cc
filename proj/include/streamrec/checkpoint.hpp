#pragma once

#include "streamrec/psirec.hpp"
#include "streamrec/tirec.hpp"

#include "json.hpp"

#include <string>

namespace streamrec::ckpt {

inline constexpr std::uint32_t format_version = 1;

// Container layout: magic "SRECCKPT", u32 version, u64 header length, JSON
// header (model surface: state type, id maps, array directory, attention,
// config echo), float64 payload, trailing CRC32 of everything before it.
// All integers and floats little-endian. save(load(p)) is byte-identical
// to p.

void save(const SvdState& st, const std::string& path,
          const nlohmann::ordered_json& config = nlohmann::ordered_json::object());
void save(const TuckerState& st, const std::string& path,
          const nlohmann::ordered_json& config = nlohmann::ordered_json::object());

struct SvdLoad {
  SvdState state;
  nlohmann::ordered_json config;
};
struct TuckerLoad {
  TuckerState state;
  nlohmann::ordered_json config;
};

SvdLoad load_svd(const std::string& path);
TuckerLoad load_tucker(const std::string& path);

// Header only: validates magic, version, and CRC, then returns the parsed
// header. "state" says which typed loader applies.
nlohmann::ordered_json read_header(const std::string& path);

}  // namespace streamrec::ckpt
