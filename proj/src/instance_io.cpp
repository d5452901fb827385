#include "condop/instance_io.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "condop/errors.hpp"

namespace condop {

using nlohmann::json;

Instance Instance::of(CondOpSpec s) {
  Instance i;
  i.spec = std::move(s);
  return i;
}

Instance Instance::of(KernelSpec k) {
  Instance i;
  i.kernel = std::move(k);
  return i;
}

Instance Instance::of(InstanceRecipe r) {
  Instance i;
  i.recipe = std::move(r);
  return i;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw InputError((path.empty() ? std::string("/") : path) + ": " + what);
}

const char* type_name(const json& j) { return j.type_name(); }

void expect(const json& j, bool ok, const std::string& path, const char* wanted) {
  if (!ok) fail(path, std::string("expected ") + wanted + ", found " + type_name(j));
}

double read_number(const json& j, const std::string& path) {
  expect(j, j.is_number(), path, "a number");
  return j.get<double>();
}

std::uint64_t read_unsigned(const json& j, const std::string& path) {
  expect(j, j.is_number_unsigned(), path, "a non-negative integer");
  return j.get<std::uint64_t>();
}

cplx read_complex(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected a [re, im] pair");
  return {read_number(j[0], path + "/0"), read_number(j[1], path + "/1")};
}

MeasureSpace read_points(const json& doc) {
  if (!doc.contains("points")) fail("/points", "missing");
  const json& pts = doc["points"];
  expect(pts, pts.is_array(), "/points", "an array");
  if (pts.empty()) fail("/points", "at least one point is required");
  std::vector<std::string> ids;
  std::vector<double> weights;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::string path = "/points/" + std::to_string(i);
    const json& p = pts[i];
    expect(p, p.is_object(), path, "an object");
    for (const auto& [key, _] : p.items()) {
      if (key != "id" && key != "weight") fail(path + "/" + key, "unknown field");
    }
    if (!p.contains("id")) fail(path + "/id", "missing");
    if (!p.contains("weight")) fail(path + "/weight", "missing");
    expect(p["id"], p["id"].is_string(), path + "/id", "a string");
    const auto id = p["id"].get<std::string>();
    if (!seen.insert(id).second) fail(path + "/id", "duplicate id '" + id + "'");
    const double w = read_number(p["weight"], path + "/weight");
    if (!(w > 0.0) || !std::isfinite(w)) {
      fail(path + "/weight", "weight must be positive and finite");
    }
    ids.push_back(id);
    weights.push_back(w);
  }
  return MeasureSpace(std::move(ids), std::move(weights));
}

Partition read_partition(const json& doc, const MeasureSpace& m) {
  if (!doc.contains("partition")) fail("/partition", "missing");
  const json& part = doc["partition"];
  expect(part, part.is_array(), "/partition", "an array of id lists");
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<bool> used(m.size(), false);
  for (std::size_t b = 0; b < part.size(); ++b) {
    const std::string path = "/partition/" + std::to_string(b);
    expect(part[b], part[b].is_array(), path, "an array of ids");
    if (part[b].empty()) fail(path, "empty block");
    std::vector<std::size_t> block;
    for (std::size_t k = 0; k < part[b].size(); ++k) {
      const std::string ipath = path + "/" + std::to_string(k);
      const json& id = part[b][k];
      expect(id, id.is_string(), ipath, "a point id");
      std::size_t idx = 0;
      try {
        idx = m.index_of(id.get<std::string>());
      } catch (const StructuralError&) {
        fail(ipath, "unknown point id '" + id.get<std::string>() + "'");
      }
      if (used[idx]) fail(ipath, "point '" + m.id(idx) + "' appears in two blocks");
      used[idx] = true;
      block.push_back(idx);
    }
    blocks.push_back(std::move(block));
  }
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!used[i]) fail("/partition", "point '" + m.id(i) + "' is in no block");
  }
  return Partition(std::move(blocks), m.size());
}

CFun read_function(const json& doc, const char* name, const MeasureSpace& m) {
  const std::string path = std::string("/") + name;
  if (!doc.contains(name)) fail(path, "missing");
  const json& f = doc[name];
  std::vector<cplx> values(m.size());
  if (f.is_array()) {
    if (f.size() != m.size()) {
      fail(path, "has " + std::to_string(f.size()) + " values, expected " +
                     std::to_string(m.size()));
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
      values[i] = read_complex(f[i], path + "/" + std::to_string(i));
    }
  } else if (f.is_object()) {
    std::vector<bool> set(m.size(), false);
    for (const auto& [key, val] : f.items()) {
      std::size_t idx = 0;
      try {
        idx = m.index_of(key);
      } catch (const StructuralError&) {
        fail(path + "/" + key, "unknown point id");
      }
      values[idx] = read_complex(val, path + "/" + key);
      set[idx] = true;
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (!set[i]) fail(path, "no value for point '" + m.id(i) + "'");
    }
  } else {
    fail(path, std::string("expected an array or object, found ") + type_name(f));
  }
  return CFun(std::move(values));
}

KernelSpec read_kernel(const json& doc, MeasureSpace m) {
  const json& k = doc["kernel"];
  const auto n = m.size();
  expect(k, k.is_array(), "/kernel", "an array of rows");
  if (k.size() != n) {
    fail("/kernel", "has " + std::to_string(k.size()) + " rows, expected " +
                        std::to_string(n));
  }
  std::vector<cplx> entries;
  entries.reserve(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    const std::string path = "/kernel/" + std::to_string(x);
    expect(k[x], k[x].is_array(), path, "a row array");
    if (k[x].size() != n) {
      fail(path, "has " + std::to_string(k[x].size()) + " entries, expected " +
                     std::to_string(n));
    }
    for (std::size_t y = 0; y < n; ++y) {
      entries.push_back(read_complex(k[x][y], path + "/" + std::to_string(y)));
    }
  }
  return KernelSpec(std::move(m), std::move(entries));
}

InstanceRecipe read_recipe(const json& r) {
  expect(r, r.is_object(), "/recipe", "an object");
  static const std::set<std::string> known = {
      "kind", "seed", "n_points", "n_blocks", "magnitude", "resolution", "grid"};
  for (const auto& [key, _] : r.items()) {
    if (!known.count(key)) fail("/recipe/" + key, "unknown field");
  }
  InstanceRecipe rec;
  if (!r.contains("kind")) fail("/recipe/kind", "missing");
  expect(r["kind"], r["kind"].is_string(), "/recipe/kind", "a string");
  try {
    rec.kind = recipe_kind_from_string(r["kind"].get<std::string>());
  } catch (const ArgumentError& e) {
    fail("/recipe/kind", e.what());
  }
  if (r.contains("seed")) rec.seed = read_unsigned(r["seed"], "/recipe/seed");
  if (r.contains("n_points")) rec.n_points = read_unsigned(r["n_points"], "/recipe/n_points");
  if (r.contains("n_blocks")) rec.n_blocks = read_unsigned(r["n_blocks"], "/recipe/n_blocks");
  if (r.contains("magnitude")) rec.magnitude = read_number(r["magnitude"], "/recipe/magnitude");
  if (r.contains("resolution")) {
    rec.resolution = read_unsigned(r["resolution"], "/recipe/resolution");
  }
  if (r.contains("grid")) {
    expect(r["grid"], r["grid"].is_array(), "/recipe/grid", "an array of numbers");
    for (std::size_t i = 0; i < r["grid"].size(); ++i) {
      rec.grid.push_back(read_number(r["grid"][i], "/recipe/grid/" + std::to_string(i)));
    }
  }
  try {
    (void)realize(rec);
  } catch (const std::invalid_argument& e) {
    fail("/recipe", e.what());
  }
  return rec;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text,
                                                std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

json points_json(const MeasureSpace& m) {
  json pts = json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    pts.push_back(json{{"id", m.id(i)}, {"weight", m.weight(i)}});
  }
  return pts;
}

json function_json(const CFun& f) {
  json a = json::array();
  for (const auto& z : f) a.push_back(complex_json(z));
  return a;
}

}  // namespace

Instance parse_instance(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw InputError("line " + std::to_string(line) + ", column " +
                     std::to_string(col) + ": " + e.what());
  }
  expect(doc, doc.is_object(), "", "an object");
  static const std::set<std::string> known = {"points", "partition", "u",
                                              "w", "kernel", "recipe"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.count(key)) fail("/" + key, "unknown field");
  }
  const bool has_explicit = doc.contains("u") || doc.contains("w");
  const bool has_kernel = doc.contains("kernel");
  const bool has_recipe = doc.contains("recipe");
  if (int(has_explicit) + int(has_kernel) + int(has_recipe) != 1) {
    fail("", "exactly one of {u/w, kernel, recipe} must be present");
  }
  try {
    if (has_recipe) {
      for (const char* key : {"points", "partition"}) {
        if (doc.contains(key)) fail(std::string("/") + key, "not allowed with a recipe");
      }
      return Instance::of(read_recipe(doc["recipe"]));
    }
    auto space = read_points(doc);
    if (has_kernel) {
      if (doc.contains("partition")) fail("/partition", "not allowed with a kernel");
      return Instance::of(read_kernel(doc, std::move(space)));
    }
    auto part = read_partition(doc, space);
    auto u = read_function(doc, "u", space);
    auto w = read_function(doc, "w", space);
    return Instance::of(CondOpSpec(std::move(space), std::move(part), std::move(u),
                                   std::move(w)));
  } catch (const StructuralError& e) {
    throw InputError(e.what());
  } catch (const ArgumentError& e) {
    throw InputError(e.what());
  }
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_instance(ss.str());
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

json to_json(const Instance& inst) {
  json doc = json::object();
  if (inst.recipe) {
    const auto& r = *inst.recipe;
    doc["recipe"] = json{{"kind", to_string(r.kind)},
                         {"seed", r.seed},
                         {"n_points", r.n_points},
                         {"n_blocks", r.n_blocks},
                         {"magnitude", r.magnitude},
                         {"resolution", r.resolution},
                         {"grid", r.grid}};
  } else if (inst.kernel) {
    const auto& k = *inst.kernel;
    doc["points"] = points_json(k.base());
    json rows = json::array();
    for (std::size_t x = 0; x < k.size(); ++x) {
      json row = json::array();
      for (std::size_t y = 0; y < k.size(); ++y) row.push_back(complex_json(k.k(x, y)));
      rows.push_back(std::move(row));
    }
    doc["kernel"] = std::move(rows);
  } else if (inst.spec) {
    const auto& s = *inst.spec;
    doc["points"] = points_json(s.space());
    json part = json::array();
    for (const auto& b : s.partition().blocks()) {
      json ids = json::array();
      for (const auto i : b) ids.push_back(s.space().id(i));
      part.push_back(std::move(ids));
    }
    doc["partition"] = std::move(part);
    doc["u"] = function_json(s.u());
    doc["w"] = function_json(s.w());
  }
  return doc;
}

std::string serialize(const Instance& inst) { return to_json(inst).dump(2) + "\n"; }

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

std::string digest(const Instance& inst) { return sha256_hex(serialize(inst)); }

CondOpSpec resolve(const Instance& inst) {
  if (inst.spec) return *inst.spec;
  if (inst.recipe) return realize(*inst.recipe);
  if (inst.kernel) return lift_to_condop(normalize_to_probability(*inst.kernel));
  throw ArgumentError("empty instance");
}

}  // namespace condop
