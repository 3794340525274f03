#include "sweepsim/json_io.h"

#include <array>
#include <cstdio>
#include <set>

#include <openssl/evp.h>

namespace sweepsim {

namespace {

constexpr std::array<const char*, 8> kParamKeys = {"alpha", "alpha1", "alpha2", "rho",
                                                   "psi",   "c_init", "c1",     "c2"};

double number_at(const nlohmann::json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) throw SchemaError(path + "/" + key + ": missing required field");
  const auto& v = j.at(key);
  if (!v.is_number()) throw SchemaError(path + "/" + key + ": expected a number");
  return v.get<double>();
}

}  // namespace

nlohmann::json params_to_json(const ModelParams& p) {
  return nlohmann::json{{"alpha", p.alpha}, {"alpha1", p.alpha1}, {"alpha2", p.alpha2},
                        {"rho", p.rho},     {"psi", p.psi},       {"c_init", p.c_init},
                        {"c1", p.c1},       {"c2", p.c2}};
}

ModelParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("/: parameter set must be a JSON object");
  const std::set<std::string> allowed(kParamKeys.begin(), kParamKeys.end());
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw SchemaError("/" + key + ": unknown key");
  }
  ModelParams p;
  p.alpha = number_at(j, "alpha", "");
  p.alpha1 = number_at(j, "alpha1", "");
  p.alpha2 = number_at(j, "alpha2", "");
  p.rho = number_at(j, "rho", "");
  p.psi = number_at(j, "psi", "");
  p.c_init = number_at(j, "c_init", "");
  p.c1 = number_at(j, "c1", "");
  p.c2 = number_at(j, "c2", "");
  return p;
}

SimplexState simplex_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw SchemaError("/x: expected an array of 4 numbers");
  SimplexState s;
  for (int i = 0; i < 4; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) throw SchemaError("/x: expected numbers");
    s[i] = j[static_cast<std::size_t>(i)].get<double>();
  }
  if (!s.on_simplex(1e-9)) throw SchemaError("/x: frequencies must be >= 0 and sum to 1");
  return s;
}

nlohmann::json simplex_to_json(const SimplexState& s) {
  return nlohmann::json::array({s[0], s[1], s[2], s[3]});
}

std::string git_blob_hash(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, content.data(), content.size());
  EVP_DigestFinal_ex(ctx, digest.data(), &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  hex.reserve(2 * len);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string canonical_dump(const nlohmann::json& j) {
  // nlohmann::json objects are std::map-backed, so keys already come out sorted.
  return j.dump();
}

}  // namespace sweepsim
