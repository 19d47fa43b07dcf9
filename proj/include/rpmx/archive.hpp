#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rpmx/matrix.hpp"

namespace rpmx {

enum class FieldKind { Scalar, Vector, IntVector, RealMatrix, IntMatrix };

struct FieldSpec {
  std::string name;
  FieldKind kind = FieldKind::Scalar;
};

struct ArchiveMeta {
  std::string model;
  long iterations = 0;
  long burn_in = 0;
  long thinning = 1;
  int n = 0;
  int d = 0;
  int chain = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  bool fixed_partition = false;
};

// One retained MCMC draw.  Integer-valued fields are stored in the same
// double containers and formatted without a fractional part on disk.
struct DrawRecord {
  long iter = 0;
  std::vector<int> assign;
  std::vector<double> scalars;              // by schema order
  std::vector<std::vector<double>> vectors; // by schema order
  std::vector<Matrix<double>> matrices;     // by schema order
};

// Append-only store of retained draws with a fixed per-model schema.
// Serializes to a columnar text file: one metadata line, one header line,
// then one comma-separated row per draw with space-separated values inside
// composite fields.  Floats round-trip exactly (17 significant digits).
class DrawArchive {
 public:
  DrawArchive() = default;
  DrawArchive(ArchiveMeta meta, std::vector<FieldSpec> schema);

  const ArchiveMeta& meta() const { return meta_; }
  const std::vector<FieldSpec>& schema() const { return schema_; }

  void append(DrawRecord rec);

  std::size_t size() const { return records_.size(); }
  const DrawRecord& record(std::size_t t) const { return records_[t]; }
  const std::vector<int>& assign(std::size_t t) const { return records_[t].assign; }
  double scalar(std::size_t t, const std::string& name) const;
  const std::vector<double>& vec(std::size_t t, const std::string& name) const;
  const Matrix<double>& mat(std::size_t t, const std::string& name) const;
  bool has_field(const std::string& name) const;

  long expected_retained() const {
    return (meta_.iterations - meta_.burn_in) / meta_.thinning;
  }

  void save(std::ostream& os) const;
  void save_file(const std::string& path) const;
  static DrawArchive load(std::istream& is);
  static DrawArchive load_file(const std::string& path);

 private:
  std::size_t index_of(const std::string& name, FieldKind a, FieldKind b) const;

  ArchiveMeta meta_;
  std::vector<FieldSpec> schema_;
  std::map<std::string, std::size_t> by_name_;  // name -> schema index
  std::vector<DrawRecord> records_;
};

}  // namespace rpmx
