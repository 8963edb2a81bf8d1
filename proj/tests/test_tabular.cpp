#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "crcsel/errors.hpp"
#include "crcsel/random.hpp"
#include "crcsel/synth.hpp"
#include "crcsel/tabular.hpp"
#include "helpers.hpp"

using namespace crcsel;

namespace {

const char* kSchema = R"({"attributes": [
  {"name": "cd16", "kind": "binary", "roles": ["feature"]},
  {"name": "grade", "kind": "ordinal", "levels": 4},
  {"name": "age", "kind": "continuous"},
  {"name": "survival_months", "kind": "continuous", "roles": ["outcome"]},
  {"name": "vital_status", "kind": "categorical", "levels": 3, "roles": ["outcome"]},
  {"name": "tnm_stage", "kind": "ordinal", "levels": 4, "roles": ["outcome"]}
]})";

const char* kCsv =
    "patient_id,cd16,grade,age,survival_months,vital_status,tnm_stage\n"
    "A1,1,2,61.5,72,Alive,2\n"
    "A2,0,?,58,40,DeadOfDisease,3\n"
    "A3,1,0,70.25,12,DeadOther,2\n";

std::size_t present_cells(const Dataset& ds) {
  return ds.patient_count() * ds.attribute_count() - ds.missing_count();
}

}  // namespace

TEST_SUITE("tabular") {

TEST_CASE("schema strips outcome columns from the cell matrix") {
  const auto schema = parse_schema(kSchema);
  CHECK(schema.size() == 6);
  const Dataset ds = parse_dataset(kCsv, schema);
  CHECK(ds.attribute_count() == 3);
  CHECK(ds.patient_count() == 3);
  CHECK(ds.patient_ids() == std::vector<std::string>{"A1", "A2", "A3"});
  CHECK(ds.outcomes()[1] == OutcomeRecord{40, VitalStatus::DeadOfDisease, 3});
}

TEST_CASE("one ? cell becomes exactly one missing cell at that coordinate") {
  const Dataset ds = parse_dataset(kCsv, parse_schema(kSchema));
  CHECK(ds.missing_count() == 1);
  CHECK_FALSE(ds.cell(1, 1).has_value());
  CHECK(*ds.cell(2, 2) == 70.25);
}

TEST_CASE("all three missing markers are accepted, anything else is an error") {
  const auto schema = parse_schema(kSchema);
  const std::string head = "cd16,grade,age,survival_months,vital_status,tnm_stage\n";
  const Dataset ds = parse_dataset(head + "1,NA,,72,Alive,2\n0,?,3,72,Alive,2\n", schema);
  CHECK(ds.missing_count() == 3);
  CHECK(ds.patient_ids() == std::vector<std::string>{"P0", "P1"});
  CHECK_THROWS_AS(parse_dataset(head + "1,na,3,72,Alive,2\n", schema), DataError);
  CHECK_THROWS_AS(parse_dataset(head + "1,1,nan,72,Alive,2\n", schema), DataError);
}

TEST_CASE("kind violations name the row and the column") {
  const auto schema = parse_schema(kSchema);
  const std::string csv =
      "cd16,grade,age,survival_months,vital_status,tnm_stage\n"
      "1,1,3,72,Alive,2\n"
      "2,1,3,72,Alive,2\n";
  try {
    parse_dataset(csv, schema);
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    const std::string what = e.what();
    CHECK(what.find("row 2") != std::string::npos);
    CHECK(what.find("cd16") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_dataset("cd16,grade,age,survival_months,vital_status,tnm_stage\n"
                                "1,4,3,72,Alive,2\n",
                                schema),
                  DataError);
  CHECK_THROWS_AS(parse_dataset("cd16,grade,age,survival_months,vital_status,tnm_stage\n"
                                "1,1.5,3,72,Alive,2\n",
                                schema),
                  DataError);
}

TEST_CASE("bad outcome values and headers are rejected") {
  const auto schema = parse_schema(kSchema);
  const std::string head = "cd16,grade,age,survival_months,vital_status,tnm_stage\n";
  CHECK_THROWS_AS(parse_dataset(head + "1,1,3,-2,Alive,2\n", schema), DataError);
  CHECK_THROWS_AS(parse_dataset(head + "1,1,3,12,Unknown,2\n", schema), DataError);
  CHECK_THROWS_AS(parse_dataset(head + "1,1,3,12,Alive,5\n", schema), DataError);
  CHECK_THROWS_AS(parse_dataset(head + "1,1,3,12,Alive\n", schema), DataError);
  CHECK_THROWS_AS(parse_dataset("grade,cd16,age,survival_months,vital_status,tnm_stage\n",
                                schema),
                  DataError);
  CHECK_THROWS_AS(parse_dataset("cd16,grade,age\n1,1,3\n", schema), DataError);
  CHECK_THROWS_AS(parse_dataset("patient_id," + head + "X,1,1,3,12,Alive,2\nX,1,1,3,12,Alive,2\n",
                                schema),
                  DataError);
}

TEST_CASE("schema validation") {
  CHECK_THROWS_AS(parse_schema("not json"), DataError);
  CHECK_THROWS_AS(parse_schema(R"({"attributes": [{"name": "x", "kind": "weird"}]})"),
                  DataError);
  CHECK_THROWS_AS(parse_schema(R"({"attributes": [{"name": "x", "kind": "ordinal", "levels": 1}]})"),
                  DataError);
  CHECK_THROWS_AS(
      parse_schema(R"({"attributes": [{"name": "x", "kind": "binary", "roles": ["outcome"]}]})"),
      DataError);
  CHECK_THROWS_AS(parse_schema(R"({"attributes": [{"name": "", "kind": "binary"}]})"),
                  DataError);
  const auto schema = parse_schema(kSchema);
  CHECK(parse_schema(serialize_schema(schema)) == schema);
}

TEST_CASE("dataset constructor enforces its invariants") {
  using testing::alive;
  CHECK_THROWS_AS(testing::continuous_dataset(2, {1.0}, {alive(70)}), DataError);
  CHECK_THROWS_AS(testing::continuous_dataset(1, {std::numeric_limits<double>::infinity()},
                                              {alive(70)}),
                  DataError);
  CHECK_THROWS_AS(testing::continuous_dataset(1, {1.0}, {OutcomeRecord{-1, VitalStatus::Alive, 2}}),
                  DataError);
  CHECK_THROWS_AS(
      Dataset({{"b", AttributeKind::binary(), {Role::Feature}}}, {"p"}, {Cell{0.5}}, {alive(70)}),
      DataError);
  CHECK_THROWS_AS(Dataset({{"b", AttributeKind::binary(), {Role::Feature}},
                           {"b", AttributeKind::binary(), {Role::Feature}}},
                          {"p"}, {Cell{0.0}, Cell{1.0}}, {alive(70)}),
                  DataError);
}

TEST_CASE("coverage fractions") {
  using testing::alive;
  const Cell m;
  const Dataset ds = testing::continuous_dataset(
      4, {1.0, m, 2.0, m, 1.0, 1.0, 1.0, 1.0, m, m, m, m},
      {alive(70), alive(70), alive(70)});
  const auto by_patient = coverage_by_patient(ds);
  CHECK(by_patient == std::vector<double>{0.5, 1.0, 0.0});
  const auto by_attribute = coverage_by_attribute(ds);
  CHECK(by_attribute[0] == doctest::Approx(2.0 / 3.0));
  CHECK(by_attribute[1] == doctest::Approx(1.0 / 3.0));

  const Dataset none = select(ds, {false, false, false}, {true, true, true, true});
  CHECK_THROWS(coverage_by_attribute(none));
  CHECK(coverage_by_patient(none).empty());
}

TEST_CASE("attribute present for 3 of 6 patients has coverage 0.5") {
  using testing::alive;
  const Cell m;
  const Dataset ds = testing::continuous_dataset(
      1, {1.0, m, 2.0, m, 3.0, m},
      {alive(70), alive(70), alive(70), alive(70), alive(70), alive(70)});
  CHECK(coverage_by_attribute(ds)[0] == 0.5);
}

TEST_CASE("attribute 45% populated by construction has coverage 0.45") {
  // 200 patients, exactly 90 present cells placed by a seeded shuffle.
  Rng rng(5);
  std::vector<std::size_t> order(200);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  std::vector<Cell> cells(200);
  for (std::size_t i = 0; i < 90; ++i) cells[order[i]] = rng.normal();
  const Dataset ds =
      testing::continuous_dataset(1, cells, std::vector<OutcomeRecord>(200, testing::alive(70)));
  CHECK(coverage_by_attribute(ds)[0] == doctest::Approx(0.45).epsilon(1e-15));
}

TEST_CASE("coverage sums equal the present-cell count") {
  const Dataset ds = gen_clinical_surrogate(SurrogateSpec{});
  const auto bp = coverage_by_patient(ds);
  const auto ba = coverage_by_attribute(ds);
  const double from_patients =
      std::accumulate(bp.begin(), bp.end(), 0.0) * static_cast<double>(ds.attribute_count());
  const double from_attributes =
      std::accumulate(ba.begin(), ba.end(), 0.0) * static_cast<double>(ds.patient_count());
  const auto present = static_cast<double>(present_cells(ds));
  CHECK(from_patients == doctest::Approx(present).epsilon(1e-12));
  CHECK(from_attributes == doctest::Approx(present).epsilon(1e-12));
}

TEST_CASE("select keeps order, filters outcomes and composes") {
  const Dataset ds = parse_dataset(kCsv, parse_schema(kSchema));
  CHECK(select(ds, {true, true, true}, {true, true, true}) == ds);

  const Dataset none = select(ds, {false, false, false}, {true, true, true});
  CHECK(none.patient_count() == 0);
  CHECK(none.attribute_count() == 3);

  const Dataset rows = select(ds, {true, false, true}, {true, true, true});
  CHECK(rows.patient_ids() == std::vector<std::string>{"A1", "A3"});
  CHECK(rows.outcomes()[1] == ds.outcomes()[2]);

  const std::vector<bool> p{true, false, true}, a{false, true, true};
  const Dataset both = select(ds, p, a);
  CHECK(select(select(ds, p, {true, true, true}), {true, true}, a) == both);
  CHECK(select(both, {true, true}, {true, true}) == both);
  CHECK(both.attribute(0).name == "grade");

  CHECK_THROWS_AS(select(ds, {true}, {true, true, true}), UsageError);
  CHECK_THROWS_AS(select(ds, {true, true, true}, {true}), UsageError);
}

TEST_CASE("serialize then parse is bit-exact") {
  const Dataset ds = gen_clinical_surrogate(SurrogateSpec{});
  const std::string csv = serialize_dataset(ds);
  const Dataset back = parse_dataset(csv, parse_schema(serialize_schema(ds.attributes())));
  CHECK(back == ds);
  CHECK(serialize_dataset(back) == csv);

  // Awkward doubles survive too.
  const Dataset odd = testing::continuous_dataset(
      3, {0.1, 1e-300, -123456.78901234567, std::nextafter(1.0, 2.0), 5e-324, -0.0},
      {testing::alive(60), testing::dead(3)});
  const Dataset odd_back =
      parse_dataset(serialize_dataset(odd), parse_schema(serialize_schema(odd.attributes())));
  for (std::size_t i = 0; i < odd.cells().size(); ++i) {
    CHECK(std::signbit(*odd_back.cells()[i]) == std::signbit(*odd.cells()[i]));
    CHECK(*odd_back.cells()[i] == *odd.cells()[i]);
  }
}

TEST_CASE("462 x 200 surrogate with 10% blanks parses with missing fraction 0.10") {
  SurrogateSpec spec;
  spec.n_patients = 462;
  spec.n_noise = 181;  // 200 attributes in total
  spec.seed = 3;
  const Dataset generated = gen_clinical_surrogate(spec);
  REQUIRE(generated.attribute_count() == 200);
  const Dataset ds = parse_dataset(serialize_dataset(generated),
                                   parse_schema(serialize_schema(generated.attributes())));
  const double fraction = static_cast<double>(ds.missing_count()) / (462.0 * 200.0);
  CHECK(std::abs(fraction - 0.10) <= 0.005);
  CHECK(ds.missing_count() == generated.missing_count());
}

}  // TEST_SUITE
