#pragma once

// In-memory clinical-style dataset: a patients x attributes matrix of
// optionally-missing cells plus one outcome record per patient.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace crcsel {

enum class KindTag { Binary, Ordinal, Continuous, Categorical };

class AttributeKind {
 public:
  static AttributeKind binary() { return {KindTag::Binary, 2}; }
  static AttributeKind ordinal(int levels);
  static AttributeKind categorical(int levels);
  static AttributeKind continuous() { return {KindTag::Continuous, 0}; }

  KindTag tag() const { return tag_; }
  /// Level count for discrete kinds (2 for Binary), 0 for Continuous.
  int levels() const { return levels_; }
  bool is_discrete() const { return tag_ != KindTag::Continuous; }
  /// True when a present value satisfies this kind's constraint.
  bool admits(double value) const;

  friend bool operator==(const AttributeKind&, const AttributeKind&) = default;

 private:
  AttributeKind(KindTag tag, int levels) : tag_(tag), levels_(levels) {}
  KindTag tag_;
  int levels_;
};

std::string_view to_string(KindTag tag);

enum class Role : std::uint8_t {
  Feature = 1,
  TnmDerived = 2,
  PostOperative = 4,
  Compound = 8,
  Outcome = 16,
};

std::string_view to_string(Role role);
std::optional<Role> role_from_string(std::string_view name);

class RoleSet {
 public:
  RoleSet() = default;
  RoleSet(std::initializer_list<Role> roles) {
    for (Role r : roles) insert(r);
  }

  void insert(Role r) { bits_ |= static_cast<std::uint8_t>(r); }
  bool has(Role r) const { return (bits_ & static_cast<std::uint8_t>(r)) != 0; }
  bool empty() const { return bits_ == 0; }
  bool intersects(RoleSet other) const { return (bits_ & other.bits_) != 0; }
  std::vector<Role> roles() const;

  friend bool operator==(const RoleSet&, const RoleSet&) = default;

 private:
  std::uint8_t bits_ = 0;
};

struct AttributeSpec {
  std::string name;
  AttributeKind kind = AttributeKind::continuous();
  RoleSet roles{Role::Feature};

  friend bool operator==(const AttributeSpec&, const AttributeSpec&) = default;
};

/// A present value or nullopt for missing.
using Cell = std::optional<double>;

enum class VitalStatus { Alive, DeadOfDisease, DeadOther };

std::string_view to_string(VitalStatus status);

struct OutcomeRecord {
  int survival_months = 0;
  VitalStatus vital_status = VitalStatus::Alive;
  int tnm_stage = 1;

  friend bool operator==(const OutcomeRecord&, const OutcomeRecord&) = default;
};

inline constexpr std::string_view kPatientIdColumn = "patient_id";
inline constexpr std::string_view kMonthsColumn = "survival_months";
inline constexpr std::string_view kVitalColumn = "vital_status";
inline constexpr std::string_view kStageColumn = "tnm_stage";

/// Immutable after construction. The constructor validates every
/// invariant and throws DataError on violation.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<AttributeSpec> attributes,
          std::vector<std::string> patient_ids, std::vector<Cell> cells,
          std::vector<OutcomeRecord> outcomes);

  std::size_t patient_count() const { return patient_ids_.size(); }
  std::size_t attribute_count() const { return attributes_.size(); }

  const std::vector<AttributeSpec>& attributes() const { return attributes_; }
  const AttributeSpec& attribute(std::size_t a) const { return attributes_[a]; }
  const std::vector<std::string>& patient_ids() const { return patient_ids_; }
  const std::vector<OutcomeRecord>& outcomes() const { return outcomes_; }
  /// Row-major, patient_count() x attribute_count().
  const std::vector<Cell>& cells() const { return cells_; }

  const Cell& cell(std::size_t patient, std::size_t attr) const {
    return cells_[patient * attributes_.size() + attr];
  }
  std::span<const Cell> row(std::size_t patient) const {
    return {cells_.data() + patient * attributes_.size(), attributes_.size()};
  }

  std::optional<std::size_t> find_attribute(std::string_view name) const;
  std::size_t missing_count() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<AttributeSpec> attributes_;
  std::vector<std::string> patient_ids_;
  std::vector<Cell> cells_;
  std::vector<OutcomeRecord> outcomes_;
};

/// Schema sidecar (JSON). Outcome-role entries are accepted only under the
/// three fixed outcome column names and are not part of the cell matrix.
std::vector<AttributeSpec> parse_schema(std::string_view json_text);
std::string serialize_schema(const std::vector<AttributeSpec>& schema);

/// Parses a comma-separated table whose header is an optional leading
/// `patient_id` column, the schema's non-outcome attributes in order, then
/// survival_months, vital_status, tnm_stage. Missing markers are "", "?"
/// and "NA". Errors name the 1-based data row and the column.
Dataset parse_dataset(std::string_view csv_text,
                      const std::vector<AttributeSpec>& schema);

/// Inverse of parse_dataset. Values are written in shortest round-trip
/// form, so parse(serialize(ds)) == ds bit for bit.
std::string serialize_dataset(const Dataset& ds);

std::vector<double> coverage_by_patient(const Dataset& ds);
std::vector<double> coverage_by_attribute(const Dataset& ds);

Dataset select(const Dataset& ds, const std::vector<bool>& patient_mask,
               const std::vector<bool>& attribute_mask);

/// Formats a double in shortest round-trip decimal form.
std::string format_double(double value);

}  // namespace crcsel
