#include "rpmx/archive.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rpmx {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_int(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& field) {
  std::vector<double> out;
  std::istringstream is(field);
  double v;
  while (is >> v) out.push_back(v);
  return out;
}

std::vector<int> parse_ints(const std::string& field) {
  std::vector<int> out;
  std::istringstream is(field);
  int v;
  while (is >> v) out.push_back(v);
  return out;
}

const char* kind_tag(FieldKind k) {
  switch (k) {
    case FieldKind::Scalar: return "s";
    case FieldKind::Vector: return "v";
    case FieldKind::IntVector: return "iv";
    case FieldKind::RealMatrix: return "m";
    case FieldKind::IntMatrix: return "im";
  }
  return "?";
}

FieldKind kind_from_tag(const std::string& tag) {
  if (tag == "s") return FieldKind::Scalar;
  if (tag == "v") return FieldKind::Vector;
  if (tag == "iv") return FieldKind::IntVector;
  if (tag == "m") return FieldKind::RealMatrix;
  if (tag == "im") return FieldKind::IntMatrix;
  throw std::runtime_error("archive: unknown field kind tag '" + tag + "'");
}

bool is_matrix(FieldKind k) {
  return k == FieldKind::RealMatrix || k == FieldKind::IntMatrix;
}
bool is_vector(FieldKind k) {
  return k == FieldKind::Vector || k == FieldKind::IntVector;
}
bool is_int_kind(FieldKind k) {
  return k == FieldKind::IntVector || k == FieldKind::IntMatrix;
}

}  // namespace

DrawArchive::DrawArchive(ArchiveMeta meta, std::vector<FieldSpec> schema)
    : meta_(std::move(meta)), schema_(std::move(schema)) {
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    if (!by_name_.emplace(schema_[i].name, i).second)
      throw std::invalid_argument("DrawArchive: duplicate field " + schema_[i].name);
  }
}

void DrawArchive::append(DrawRecord rec) {
  if (static_cast<int>(rec.assign.size()) != meta_.n)
    throw std::invalid_argument("DrawArchive::append: assign length mismatch");
  std::size_t ns = 0, nv = 0, nm = 0;
  for (const auto& f : schema_) {
    if (f.kind == FieldKind::Scalar) ++ns;
    else if (is_vector(f.kind)) ++nv;
    else ++nm;
  }
  if (rec.scalars.size() != ns || rec.vectors.size() != nv || rec.matrices.size() != nm)
    throw std::invalid_argument("DrawArchive::append: record does not match schema");
  records_.push_back(std::move(rec));
}

std::size_t DrawArchive::index_of(const std::string& name, FieldKind a,
                                  FieldKind b) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end())
    throw std::invalid_argument("DrawArchive: no field named " + name);
  FieldKind k = schema_[it->second].kind;
  if (k != a && k != b)
    throw std::invalid_argument("DrawArchive: field " + name + " has a different kind");
  // Count preceding fields of the same storage class.
  std::size_t pos = 0;
  for (std::size_t i = 0; i < it->second; ++i) {
    FieldKind ki = schema_[i].kind;
    if (k == FieldKind::Scalar ? ki == FieldKind::Scalar
        : is_vector(k)         ? is_vector(ki)
                               : is_matrix(ki))
      ++pos;
  }
  return pos;
}

bool DrawArchive::has_field(const std::string& name) const {
  return by_name_.count(name) > 0;
}

double DrawArchive::scalar(std::size_t t, const std::string& name) const {
  return records_[t].scalars[index_of(name, FieldKind::Scalar, FieldKind::Scalar)];
}

const std::vector<double>& DrawArchive::vec(std::size_t t,
                                            const std::string& name) const {
  return records_[t].vectors[index_of(name, FieldKind::Vector, FieldKind::IntVector)];
}

const Matrix<double>& DrawArchive::mat(std::size_t t,
                                       const std::string& name) const {
  return records_[t].matrices[index_of(name, FieldKind::RealMatrix, FieldKind::IntMatrix)];
}

void DrawArchive::save(std::ostream& os) const {
  os << "model=" << meta_.model << ",iterations=" << meta_.iterations
     << ",burn_in=" << meta_.burn_in << ",thinning=" << meta_.thinning
     << ",n=" << meta_.n << ",d=" << meta_.d << ",chain=" << meta_.chain
     << ",seed=" << meta_.seed << ",stream=" << meta_.stream
     << ",fixed_partition=" << (meta_.fixed_partition ? 1 : 0) << "\n";
  os << "iter,assign";
  for (const auto& f : schema_) os << ',' << kind_tag(f.kind) << ':' << f.name;
  os << "\n";
  for (const auto& rec : records_) {
    os << rec.iter << ',';
    for (std::size_t i = 0; i < rec.assign.size(); ++i) {
      if (i) os << ' ';
      os << rec.assign[i];
    }
    std::size_t is = 0, iv = 0, im = 0;
    for (const auto& f : schema_) {
      os << ',';
      if (f.kind == FieldKind::Scalar) {
        os << fmt_double(rec.scalars[is++]);
      } else if (is_vector(f.kind)) {
        const auto& v = rec.vectors[iv++];
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) os << ' ';
          os << (is_int_kind(f.kind) ? fmt_int(v[i]) : fmt_double(v[i]));
        }
      } else {
        const auto& m = rec.matrices[im++];
        // rows are recoverable from the column count in the header
        auto flat = m.data();
        for (std::size_t i = 0; i < flat.size(); ++i) {
          if (i) os << ' ';
          os << (is_int_kind(f.kind) ? fmt_int(flat[i]) : fmt_double(flat[i]));
        }
      }
    }
    os << "\n";
  }
}

void DrawArchive::save_file(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("DrawArchive: cannot write " + path);
  save(os);
}

DrawArchive DrawArchive::load(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("archive: empty stream");
  ArchiveMeta meta;
  for (const auto& kv : split(line, ',')) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::runtime_error("archive: bad metadata entry " + kv);
    std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
    if (key == "model") meta.model = val;
    else if (key == "iterations") meta.iterations = std::stol(val);
    else if (key == "burn_in") meta.burn_in = std::stol(val);
    else if (key == "thinning") meta.thinning = std::stol(val);
    else if (key == "n") meta.n = std::stoi(val);
    else if (key == "d") meta.d = std::stoi(val);
    else if (key == "chain") meta.chain = std::stoi(val);
    else if (key == "seed") meta.seed = std::stoull(val);
    else if (key == "stream") meta.stream = std::stoull(val);
    else if (key == "fixed_partition") meta.fixed_partition = val == "1";
    else throw std::runtime_error("archive: unknown metadata key " + key);
  }
  if (!std::getline(is, line)) throw std::runtime_error("archive: missing header");
  auto cols = split(line, ',');
  if (cols.size() < 2 || cols[0] != "iter" || cols[1] != "assign")
    throw std::runtime_error("archive: malformed header");
  std::vector<FieldSpec> schema;
  for (std::size_t c = 2; c < cols.size(); ++c) {
    auto colon = cols[c].find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("archive: malformed header field " + cols[c]);
    schema.push_back({cols[c].substr(colon + 1), kind_from_tag(cols[c].substr(0, colon))});
  }
  DrawArchive ar(meta, schema);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != schema.size() + 2)
      throw std::runtime_error("archive: row with wrong field count");
    DrawRecord rec;
    rec.iter = std::stol(fields[0]);
    rec.assign = parse_ints(fields[1]);
    std::size_t fi = 2;
    for (const auto& f : schema) {
      const std::string& raw = fields[fi++];
      if (f.kind == FieldKind::Scalar) {
        rec.scalars.push_back(std::stod(raw));
      } else if (is_vector(f.kind)) {
        rec.vectors.push_back(parse_doubles(raw));
      } else {
        auto flat = parse_doubles(raw);
        std::size_t cols_n = static_cast<std::size_t>(meta.d);
        if (cols_n == 0 || flat.size() % cols_n != 0)
          throw std::runtime_error("archive: matrix field with ragged size");
        Matrix<double> m(flat.size() / cols_n, cols_n);
        for (std::size_t i = 0; i < flat.size(); ++i)
          m(i / cols_n, i % cols_n) = flat[i];
        rec.matrices.push_back(std::move(m));
      }
    }
    ar.append(std::move(rec));
  }
  return ar;
}

DrawArchive DrawArchive::load_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("DrawArchive: cannot read " + path);
  return load(is);
}

}  // namespace rpmx
