#include "crcsel/tabular.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "crcsel/errors.hpp"

namespace crcsel {

namespace {

using ordered_json = nlohmann::ordered_json;

bool is_missing_marker(std::string_view token) {
  return token.empty() || token == "?" || token == "NA";
}

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  // Trailing blank lines carry no rows.
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::optional<double> parse_number(std::string_view token) {
  double value = 0.0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<int> parse_int(std::string_view token) {
  int value = 0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    return std::nullopt;
  }
  return value;
}

std::optional<VitalStatus> parse_vital(std::string_view token) {
  if (token == "Alive") return VitalStatus::Alive;
  if (token == "DeadOfDisease") return VitalStatus::DeadOfDisease;
  if (token == "DeadOther") return VitalStatus::DeadOther;
  return std::nullopt;
}

[[noreturn]] void cell_error(std::size_t row, std::string_view column,
                             std::string_view what) {
  std::ostringstream msg;
  msg << "row " << row << ", column '" << column << "': " << what;
  throw DataError(msg.str());
}

bool is_outcome_column(std::string_view name) {
  return name == kMonthsColumn || name == kVitalColumn || name == kStageColumn;
}

void validate_spec(const AttributeSpec& spec) {
  if (spec.name.empty()) throw DataError("attribute with empty name");
  if (spec.name.find_first_of(",\n\r\"") != std::string::npos) {
    throw DataError("attribute name '" + spec.name +
                    "' contains a CSV delimiter or quote");
  }
  if (spec.roles.empty()) {
    throw DataError("attribute '" + spec.name + "' has no roles");
  }
  if (spec.roles.has(Role::Outcome)) {
    if (spec.roles != RoleSet{Role::Outcome}) {
      throw DataError("attribute '" + spec.name +
                      "': outcome role cannot be combined with other roles");
    }
    if (!is_outcome_column(spec.name)) {
      throw DataError("outcome attribute '" + spec.name +
                      "' is not one of survival_months, vital_status, "
                      "tnm_stage");
    }
  } else if (is_outcome_column(spec.name) || spec.name == kPatientIdColumn) {
    throw DataError("reserved column name '" + spec.name +
                    "' used for a non-outcome attribute");
  }
}

}  // namespace

AttributeKind AttributeKind::ordinal(int levels) {
  if (levels < 2) throw DataError("ordinal attribute needs >= 2 levels");
  return {KindTag::Ordinal, levels};
}

AttributeKind AttributeKind::categorical(int levels) {
  if (levels < 2) throw DataError("categorical attribute needs >= 2 levels");
  return {KindTag::Categorical, levels};
}

bool AttributeKind::admits(double value) const {
  if (!std::isfinite(value)) return false;
  if (tag_ == KindTag::Continuous) return true;
  return value == std::floor(value) && value >= 0.0 && value < levels_;
}

std::string_view to_string(KindTag tag) {
  switch (tag) {
    case KindTag::Binary: return "binary";
    case KindTag::Ordinal: return "ordinal";
    case KindTag::Continuous: return "continuous";
    case KindTag::Categorical: return "categorical";
  }
  return "?";
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Feature: return "feature";
    case Role::TnmDerived: return "tnm_derived";
    case Role::PostOperative: return "post_operative";
    case Role::Compound: return "compound";
    case Role::Outcome: return "outcome";
  }
  return "?";
}

std::optional<Role> role_from_string(std::string_view name) {
  for (Role r : {Role::Feature, Role::TnmDerived, Role::PostOperative,
                 Role::Compound, Role::Outcome}) {
    if (to_string(r) == name) return r;
  }
  return std::nullopt;
}

std::vector<Role> RoleSet::roles() const {
  std::vector<Role> out;
  for (Role r : {Role::Feature, Role::TnmDerived, Role::PostOperative,
                 Role::Compound, Role::Outcome}) {
    if (has(r)) out.push_back(r);
  }
  return out;
}

std::string_view to_string(VitalStatus status) {
  switch (status) {
    case VitalStatus::Alive: return "Alive";
    case VitalStatus::DeadOfDisease: return "DeadOfDisease";
    case VitalStatus::DeadOther: return "DeadOther";
  }
  return "?";
}

Dataset::Dataset(std::vector<AttributeSpec> attributes,
                 std::vector<std::string> patient_ids, std::vector<Cell> cells,
                 std::vector<OutcomeRecord> outcomes)
    : attributes_(std::move(attributes)),
      patient_ids_(std::move(patient_ids)),
      cells_(std::move(cells)),
      outcomes_(std::move(outcomes)) {
  std::set<std::string_view> names;
  for (const auto& spec : attributes_) {
    validate_spec(spec);
    if (spec.roles.has(Role::Outcome)) {
      throw DataError("outcome attribute '" + spec.name +
                      "' cannot be a matrix column");
    }
    if (!names.insert(spec.name).second) {
      throw DataError("duplicate attribute name '" + spec.name + "'");
    }
  }
  if (outcomes_.size() != patient_ids_.size()) {
    throw DataError("outcome count does not match patient count");
  }
  if (cells_.size() != patient_ids_.size() * attributes_.size()) {
    throw DataError("cell matrix size does not match dimensions");
  }
  for (std::size_t p = 0; p < patient_ids_.size(); ++p) {
    const auto& o = outcomes_[p];
    if (o.survival_months < 0) {
      throw DataError("patient '" + patient_ids_[p] + "': negative months");
    }
    if (o.tnm_stage < 1 || o.tnm_stage > 4) {
      throw DataError("patient '" + patient_ids_[p] + "': tnm_stage not 1-4");
    }
    for (std::size_t a = 0; a < attributes_.size(); ++a) {
      const Cell& c = cell(p, a);
      if (c && !attributes_[a].kind.admits(*c)) {
        std::ostringstream msg;
        msg << "patient '" << patient_ids_[p] << "', attribute '"
            << attributes_[a].name << "': value " << *c
            << " violates kind " << to_string(attributes_[a].kind.tag());
        throw DataError(msg.str());
      }
    }
  }
}

std::optional<std::size_t> Dataset::find_attribute(std::string_view name) const {
  for (std::size_t a = 0; a < attributes_.size(); ++a) {
    if (attributes_[a].name == name) return a;
  }
  return std::nullopt;
}

std::size_t Dataset::missing_count() const {
  std::size_t n = 0;
  for (const auto& c : cells_) n += c ? 0 : 1;
  return n;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw InvariantError("to_chars failed");
  return std::string(buf.data(), ptr);
}

std::vector<AttributeSpec> parse_schema(std::string_view json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("schema is not valid JSON: ") + e.what());
  }
  const auto& list = doc.is_object() ? doc.value("attributes", ordered_json())
                                     : doc;
  if (!list.is_array()) throw DataError("schema must list attributes");

  std::vector<AttributeSpec> schema;
  try {
    for (const auto& entry : list) {
      AttributeSpec spec;
      spec.name = entry.at("name").get<std::string>();
      const auto kind = entry.at("kind").get<std::string>();
      if (kind == "binary") {
        spec.kind = AttributeKind::binary();
      } else if (kind == "ordinal") {
        spec.kind = AttributeKind::ordinal(entry.at("levels").get<int>());
      } else if (kind == "categorical") {
        spec.kind = AttributeKind::categorical(entry.at("levels").get<int>());
      } else if (kind == "continuous") {
        spec.kind = AttributeKind::continuous();
      } else {
        throw DataError("attribute '" + spec.name + "': unknown kind '" +
                        kind + "'");
      }
      spec.roles = RoleSet{};
      for (const auto& r : entry.value("roles", ordered_json::array({"feature"}))) {
        const auto role = role_from_string(r.get<std::string>());
        if (!role) {
          throw DataError("attribute '" + spec.name + "': unknown role '" +
                          r.get<std::string>() + "'");
        }
        spec.roles.insert(*role);
      }
      validate_spec(spec);
      schema.push_back(std::move(spec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed schema entry: ") + e.what());
  }
  return schema;
}

std::string serialize_schema(const std::vector<AttributeSpec>& schema) {
  ordered_json list = ordered_json::array();
  for (const auto& spec : schema) {
    ordered_json entry;
    entry["name"] = spec.name;
    entry["kind"] = std::string(to_string(spec.kind.tag()));
    if (spec.kind.tag() == KindTag::Ordinal ||
        spec.kind.tag() == KindTag::Categorical) {
      entry["levels"] = spec.kind.levels();
    }
    ordered_json roles = ordered_json::array();
    for (Role r : spec.roles.roles()) roles.push_back(std::string(to_string(r)));
    entry["roles"] = roles;
    list.push_back(entry);
  }
  ordered_json doc;
  doc["attributes"] = list;
  return doc.dump(2) + "\n";
}

Dataset parse_dataset(std::string_view csv_text,
                      const std::vector<AttributeSpec>& schema) {
  std::vector<AttributeSpec> attributes;
  for (const auto& spec : schema) {
    validate_spec(spec);
    if (!spec.roles.has(Role::Outcome)) attributes.push_back(spec);
  }

  const auto lines = split_lines(csv_text);
  if (lines.empty()) throw DataError("CSV has no header row");
  const auto header = split_line(lines[0]);

  const bool has_ids = !header.empty() && header[0] == kPatientIdColumn;
  const std::size_t offset = has_ids ? 1 : 0;
  const std::size_t expected = offset + attributes.size() + 3;
  bool header_ok = header.size() == expected;
  for (std::size_t a = 0; header_ok && a < attributes.size(); ++a) {
    header_ok = header[offset + a] == attributes[a].name;
  }
  if (header_ok) {
    const std::size_t o = offset + attributes.size();
    header_ok = header[o] == kMonthsColumn && header[o + 1] == kVitalColumn &&
                header[o + 2] == kStageColumn;
  }
  if (!header_ok) {
    throw DataError(
        "CSV header does not match schema (expected [patient_id,] schema "
        "attributes in order, then survival_months,vital_status,tnm_stage)");
  }

  const std::size_t n_rows = lines.size() - 1;
  std::vector<std::string> ids;
  std::vector<Cell> cells;
  std::vector<OutcomeRecord> outcomes;
  ids.reserve(n_rows);
  cells.reserve(n_rows * attributes.size());
  outcomes.reserve(n_rows);

  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::size_t row_no = r + 1;
    const auto fields = split_line(lines[r + 1]);
    if (fields.size() != expected) {
      std::ostringstream msg;
      msg << "row " << row_no << ": expected " << expected << " fields, got "
          << fields.size();
      throw DataError(msg.str());
    }
    if (has_ids) {
      if (fields[0].empty()) cell_error(row_no, kPatientIdColumn, "empty id");
      ids.emplace_back(fields[0]);
    } else {
      ids.push_back("P" + std::to_string(r));
    }
    for (std::size_t a = 0; a < attributes.size(); ++a) {
      const auto token = fields[offset + a];
      if (is_missing_marker(token)) {
        cells.emplace_back(std::nullopt);
        continue;
      }
      const auto value = parse_number(token);
      if (!value) {
        cell_error(row_no, attributes[a].name,
                   "unparseable value '" + std::string(token) + "'");
      }
      if (!attributes[a].kind.admits(*value)) {
        cell_error(row_no, attributes[a].name,
                   "value '" + std::string(token) + "' violates kind " +
                       std::string(to_string(attributes[a].kind.tag())));
      }
      cells.emplace_back(*value);
    }
    const std::size_t o = offset + attributes.size();
    OutcomeRecord rec;
    const auto months = parse_int(fields[o]);
    if (!months || *months < 0) {
      cell_error(row_no, kMonthsColumn, "invalid months '" +
                                            std::string(fields[o]) + "'");
    }
    rec.survival_months = *months;
    const auto vital = parse_vital(fields[o + 1]);
    if (!vital) {
      cell_error(row_no, kVitalColumn,
                 "invalid status '" + std::string(fields[o + 1]) + "'");
    }
    rec.vital_status = *vital;
    const auto stage = parse_int(fields[o + 2]);
    if (!stage || *stage < 1 || *stage > 4) {
      cell_error(row_no, kStageColumn,
                 "invalid stage '" + std::string(fields[o + 2]) + "'");
    }
    rec.tnm_stage = *stage;
    outcomes.push_back(rec);
  }

  std::set<std::string_view> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) throw DataError("duplicate patient id '" + id + "'");
  }
  return Dataset(std::move(attributes), std::move(ids), std::move(cells),
                 std::move(outcomes));
}

std::string serialize_dataset(const Dataset& ds) {
  std::string out;
  out += kPatientIdColumn;
  for (const auto& spec : ds.attributes()) {
    out += ',';
    out += spec.name;
  }
  out += ',';
  out += kMonthsColumn;
  out += ',';
  out += kVitalColumn;
  out += ',';
  out += kStageColumn;
  out += '\n';
  for (std::size_t p = 0; p < ds.patient_count(); ++p) {
    out += ds.patient_ids()[p];
    for (const Cell& c : ds.row(p)) {
      out += ',';
      if (c) out += format_double(*c);
    }
    const auto& o = ds.outcomes()[p];
    out += ',';
    out += std::to_string(o.survival_months);
    out += ',';
    out += to_string(o.vital_status);
    out += ',';
    out += std::to_string(o.tnm_stage);
    out += '\n';
  }
  return out;
}

std::vector<double> coverage_by_patient(const Dataset& ds) {
  if (ds.attribute_count() == 0) {
    throw DataError("coverage_by_patient: dataset has no attributes");
  }
  std::vector<double> out(ds.patient_count());
  const auto d = static_cast<double>(ds.attribute_count());
  for (std::size_t p = 0; p < ds.patient_count(); ++p) {
    std::size_t present = 0;
    for (const Cell& c : ds.row(p)) present += c ? 1 : 0;
    out[p] = static_cast<double>(present) / d;
  }
  return out;
}

std::vector<double> coverage_by_attribute(const Dataset& ds) {
  if (ds.patient_count() == 0) {
    throw DataError("coverage_by_attribute: dataset has no patients");
  }
  std::vector<std::size_t> present(ds.attribute_count(), 0);
  for (std::size_t p = 0; p < ds.patient_count(); ++p) {
    const auto row = ds.row(p);
    for (std::size_t a = 0; a < row.size(); ++a) present[a] += row[a] ? 1 : 0;
  }
  std::vector<double> out(ds.attribute_count());
  const auto n = static_cast<double>(ds.patient_count());
  for (std::size_t a = 0; a < out.size(); ++a) {
    out[a] = static_cast<double>(present[a]) / n;
  }
  return out;
}

Dataset select(const Dataset& ds, const std::vector<bool>& patient_mask,
               const std::vector<bool>& attribute_mask) {
  if (patient_mask.size() != ds.patient_count() ||
      attribute_mask.size() != ds.attribute_count()) {
    throw UsageError("select: mask length does not match dataset");
  }
  std::vector<AttributeSpec> attributes;
  for (std::size_t a = 0; a < ds.attribute_count(); ++a) {
    if (attribute_mask[a]) attributes.push_back(ds.attribute(a));
  }
  std::vector<std::string> ids;
  std::vector<Cell> cells;
  std::vector<OutcomeRecord> outcomes;
  for (std::size_t p = 0; p < ds.patient_count(); ++p) {
    if (!patient_mask[p]) continue;
    ids.push_back(ds.patient_ids()[p]);
    outcomes.push_back(ds.outcomes()[p]);
    const auto row = ds.row(p);
    for (std::size_t a = 0; a < row.size(); ++a) {
      if (attribute_mask[a]) cells.push_back(row[a]);
    }
  }
  return Dataset(std::move(attributes), std::move(ids), std::move(cells),
                 std::move(outcomes));
}

}  // namespace crcsel
