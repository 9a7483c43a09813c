#include <doctest.h>

#include <cstdlib>
#include <cstring>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcc/dataset.hpp"
#include "mcc/inference.hpp"
#include "mcc/io.hpp"
#include "mcc/synthgen.hpp"
#include "oracle_helpers.hpp"

using mcc::Dataset;
using mcc::FamilyData;
using mcc::FamilyKind;
using mcc::Index;
using mcc::Matrix;
using mcc::ParseError;

namespace {

bool same_bits(double a, double b) {
  return std::memcmp(&a, &b, sizeof(double)) == 0;
}

double reparse(const std::string& text) {
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  REQUIRE(end == text.c_str() + text.size());
  return value;
}

// A small mixed dataset with awkward values and a few masked cells.
Dataset mixed_dataset() {
  Dataset data;

  FamilyData gaussian;
  gaussian.family = {FamilyKind::Gaussian, 0};
  gaussian.values = Matrix::Zero(4, 2);
  gaussian.values << 0.1, 1.0 / 3.0, -1e300, 5e-324, -0.0, 123456789.123456789, 2.0, -7.25;
  gaussian.observed = Matrix::Ones(4, 2);
  gaussian.observed(1, 0) = 0.0;
  gaussian.feature_names = {"expr_a", "expr_b"};
  data.families.push_back(gaussian);

  FamilyData poisson;
  poisson.family = {FamilyKind::Poisson, 0};
  poisson.values = Matrix::Zero(4, 1);
  poisson.values << 3.0, 0.0, 17.0, 4.0;
  poisson.observed = Matrix::Ones(4, 1);
  poisson.observed(3, 0) = 0.0;
  poisson.feature_names = {"hits"};
  data.families.push_back(poisson);

  FamilyData categorical;
  categorical.family = {FamilyKind::Categorical, 3};
  categorical.values = Matrix::Zero(4, 2);
  categorical.values << 0.0, 2.0, 1.0, 1.0, 2.0, 0.0, 0.0, 2.0;
  categorical.observed = Matrix::Ones(4, 2);
  categorical.observed(0, 1) = 0.0;
  categorical.feature_names = {"color", "shape"};
  data.families.push_back(categorical);

  data.object_ids = {"obj_a", "obj_b", "obj_c", "obj_d"};
  return data;
}

std::string contains_what(const std::exception& e) { return e.what(); }

}  // namespace

TEST_CASE("format_real round-trips doubles exactly") {
  const double anchors[] = {0.0,
                            -0.0,
                            1.0,
                            0.1,
                            1.0 / 3.0,
                            -2.5,
                            1e300,
                            -1e300,
                            5e-324,
                            std::numeric_limits<double>::max(),
                            std::numeric_limits<double>::lowest(),
                            std::numeric_limits<double>::epsilon(),
                            123456789.123456789};
  for (double x : anchors) {
    CAPTURE(x);
    CHECK(same_bits(reparse(mcc::format_real(x)), x));
  }
  CHECK(mcc::format_real(-0.0) == "-0");
  CHECK(mcc::format_real(2.0) == "2");

  oracle::Rng rng(99);
  int checked = 0;
  while (checked < 1000) {
    const std::uint64_t bits = rng.raw();
    double x;
    std::memcpy(&x, &bits, sizeof(double));
    if (!std::isfinite(x)) continue;
    CAPTURE(x);
    REQUIRE(same_bits(reparse(mcc::format_real(x)), x));
    ++checked;
  }
}

TEST_CASE("family specs round-trip and reject malformed text") {
  const mcc::FeatureFamily gaussian{FamilyKind::Gaussian, 0};
  const mcc::FeatureFamily poisson{FamilyKind::Poisson, 0};
  const mcc::FeatureFamily categorical{FamilyKind::Categorical, 4};
  const mcc::FeatureFamily multinomial{FamilyKind::Multinomial, 6};

  CHECK(mcc::family_spec(gaussian) == "gaussian");
  CHECK(mcc::family_spec(poisson) == "poisson");
  CHECK(mcc::family_spec(categorical) == "categorical:4");
  CHECK(mcc::family_spec(multinomial) == "multinomial:6");

  CHECK(mcc::parse_family_spec("gaussian") == gaussian);
  CHECK(mcc::parse_family_spec("poisson") == poisson);
  CHECK(mcc::parse_family_spec("categorical:4") == categorical);
  CHECK(mcc::parse_family_spec("categorical:2") ==
        mcc::FeatureFamily{FamilyKind::Categorical, 2});

  CHECK_THROWS_AS(mcc::parse_family_spec("categorical:1"), ParseError);
  CHECK_THROWS_AS(mcc::parse_family_spec("categorical:"), ParseError);
  CHECK_THROWS_AS(mcc::parse_family_spec("gauss"), ParseError);
  CHECK_THROWS_AS(mcc::parse_family_spec(""), ParseError);

  // Count-vector cells have no single-column text form, so the family spec
  // is not accepted by the CSV schema even though the writer can name it.
  try {
    mcc::parse_family_spec("multinomial:2");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(contains_what(e).find("unknown family spec") != std::string::npos);
  }
}

TEST_CASE("dataset CSV and schema round-trip with missing cells") {
  const Dataset data = mixed_dataset();

  std::ostringstream csv, schema;
  mcc::write_dataset_csv(data, csv);
  mcc::write_schema(data, schema);

  CHECK(schema.str() ==
        "expr_a gaussian\n"
        "expr_b gaussian\n"
        "hits poisson\n"
        "color categorical:3\n"
        "shape categorical:3\n");
  {
    std::istringstream lines(csv.str());
    std::string header;
    std::getline(lines, header);
    CHECK(header == "object_id,expr_a,expr_b,hits,color,shape");
    std::string row;
    std::getline(lines, row);
    CHECK(row == "obj_a,0.10000000000000001,0.33333333333333331,3,0,");
  }

  std::istringstream csv_in(csv.str()), schema_in(schema.str());
  const Dataset back = mcc::read_dataset(csv_in, schema_in);

  REQUIRE(back.families.size() == data.families.size());
  CHECK(back.object_ids == data.object_ids);
  for (std::size_t m = 0; m < data.families.size(); ++m) {
    const FamilyData& want = data.families[m];
    const FamilyData& got = back.families[m];
    CHECK(got.family == want.family);
    CHECK(got.feature_names == want.feature_names);
    REQUIRE(got.values.rows() == want.values.rows());
    REQUIRE(got.values.cols() == want.values.cols());
    CHECK(got.observed.cwiseEqual(want.observed).all());
    for (Index i = 0; i < want.rows(); ++i)
      for (Index j = 0; j < want.cols(); ++j)
        if (want.is_observed(i, j)) {
          CAPTURE(m);
          CAPTURE(i);
          CAPTURE(j);
          CHECK(same_bits(got.values(i, j), want.values(i, j)));
        }
  }
  CHECK(mcc::validate(back).empty());
}

TEST_CASE("read_dataset treats empty fields and NA as missing") {
  std::istringstream csv(
      "object_id,x,y\n"
      "o1,NA,1.5\n"
      "o2,,\n"
      "o3,2.5,NA\n");
  std::istringstream schema("x gaussian\ny poisson\n");
  const Dataset data = mcc::read_dataset(csv, schema);

  REQUIRE(data.families.size() == 2);
  const Matrix& gx = data.families[0].observed;
  const Matrix& py = data.families[1].observed;
  CHECK(gx(0, 0) == 0.0);
  CHECK(gx(1, 0) == 0.0);
  CHECK(gx(2, 0) == 1.0);
  CHECK(py(0, 0) == 1.0);
  CHECK(py(1, 0) == 0.0);
  CHECK(py(2, 0) == 0.0);
  CHECK(data.families[0].values(2, 0) == 2.5);
  CHECK(data.families[1].values(0, 0) == 1.5);
}

TEST_CASE("read_dataset groups columns by family in order of first appearance") {
  // Interleaved columns: the two gaussian columns land in one family block
  // that remembers each column's name, regardless of CSV order.
  std::istringstream csv(
      "object_id,g0,p0,g1\n"
      "a,1,2,3\n"
      "b,4,5,6\n");
  std::istringstream schema("g0 gaussian\np0 poisson\ng1 gaussian\n");
  const Dataset data = mcc::read_dataset(csv, schema);

  REQUIRE(data.families.size() == 2);
  CHECK(data.families[0].family.kind == FamilyKind::Gaussian);
  CHECK(data.families[0].feature_names == std::vector<std::string>{"g0", "g1"});
  CHECK(data.families[1].family.kind == FamilyKind::Poisson);
  CHECK(data.families[1].feature_names == std::vector<std::string>{"p0"});
  CHECK(data.families[0].values(0, 0) == 1.0);
  CHECK(data.families[0].values(0, 1) == 3.0);
  CHECK(data.families[0].values(1, 1) == 6.0);
  CHECK(data.families[1].values(1, 0) == 5.0);
}

TEST_CASE("read_dataset reports malformed input with line numbers") {
  const std::string schema_text = "x gaussian\ny poisson\n";

  SUBCASE("empty data file") {
    std::istringstream csv(""), schema(schema_text);
    CHECK_THROWS_AS(mcc::read_dataset(csv, schema), ParseError);
  }
  SUBCASE("header must start with object_id") {
    std::istringstream csv("id,x,y\na,1,2\n"), schema(schema_text);
    try {
      mcc::read_dataset(csv, schema);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(contains_what(e).find("object_id") != std::string::npos);
    }
  }
  SUBCASE("columns must be declared in the schema") {
    std::istringstream csv("object_id,x,z\na,1,2\n"), schema(schema_text);
    try {
      mcc::read_dataset(csv, schema);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(contains_what(e).find("'z'") != std::string::npos);
      CHECK(contains_what(e).find("not declared") != std::string::npos);
    }
  }
  SUBCASE("schema columns must appear in the data") {
    std::istringstream csv("object_id,x\na,1\n"), schema(schema_text);
    try {
      mcc::read_dataset(csv, schema);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(contains_what(e).find("'y'") != std::string::npos);
      CHECK(contains_what(e).find("not present") != std::string::npos);
    }
  }
  SUBCASE("rows must have the header's field count") {
    std::istringstream csv("object_id,x,y\na,1,2\nb,3\n"), schema(schema_text);
    try {
      mcc::read_dataset(csv, schema);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(contains_what(e).find("line 3") != std::string::npos);
      CHECK(contains_what(e).find("expected 3 fields, found 2") != std::string::npos);
    }
  }
  SUBCASE("unparseable cells name their line") {
    std::istringstream csv("object_id,x,y\na,1,2\nb,oops,4\n"), schema(schema_text);
    try {
      mcc::read_dataset(csv, schema);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(contains_what(e).find("line 3") != std::string::npos);
      CHECK(contains_what(e).find("'oops'") != std::string::npos);
    }
  }
  SUBCASE("trailing garbage after a number is rejected") {
    std::istringstream csv("object_id,x,y\na,1.5x,2\n"), schema(schema_text);
    CHECK_THROWS_AS(mcc::read_dataset(csv, schema), ParseError);
  }
  SUBCASE("schema lines are validated") {
    std::istringstream good_csv("object_id,x\na,1\n");
    {
      std::istringstream schema("x\n");
      CHECK_THROWS_AS(mcc::read_dataset(good_csv, schema), ParseError);
    }
    {
      std::istringstream csv2("object_id,x\na,1\n"), schema("x gaussian extra\n");
      try {
        mcc::read_dataset(csv2, schema);
        FAIL("expected ParseError");
      } catch (const ParseError& e) {
        CHECK(contains_what(e).find("schema line 1") != std::string::npos);
      }
    }
    {
      std::istringstream csv3("object_id,x\na,1\n"),
          schema("x gaussian\nx poisson\n");
      try {
        mcc::read_dataset(csv3, schema);
        FAIL("expected ParseError");
      } catch (const ParseError& e) {
        CHECK(contains_what(e).find("schema line 2") != std::string::npos);
        CHECK(contains_what(e).find("duplicate") != std::string::npos);
      }
    }
  }
}

TEST_CASE("dataset writers reject what the text format cannot carry") {
  Dataset data = mixed_dataset();
  std::ostringstream out;

  SUBCASE("multinomial families have no CSV encoding") {
    oracle::Rng rng(3);
    data.families.push_back(oracle::multinomial_family(rng, 4, 1, 3, 5, 0.0));
    CHECK_THROWS_AS(mcc::write_dataset_csv(data, out), std::invalid_argument);
    CHECK_THROWS_AS(mcc::write_schema(data, out), std::invalid_argument);
  }
  SUBCASE("feature names must be comma- and whitespace-free") {
    data.families[0].feature_names[0] = "bad name";
    CHECK_THROWS_AS(mcc::write_dataset_csv(data, out), std::invalid_argument);
    data.families[0].feature_names[0] = "bad,name";
    CHECK_THROWS_AS(mcc::write_dataset_csv(data, out), std::invalid_argument);
    data.families[0].feature_names[0] = "";
    CHECK_THROWS_AS(mcc::write_dataset_csv(data, out), std::invalid_argument);
  }
  SUBCASE("object ids must be comma- and whitespace-free") {
    data.object_ids[2] = "obj c";
    CHECK_THROWS_AS(mcc::write_dataset_csv(data, out), std::invalid_argument);
  }
}

TEST_CASE("assignments files round-trip features and objects") {
  const Dataset data = mixed_dataset();
  mcc::Assignments assignments;
  assignments.features = {{{0, 1}, {2, 0}}, {{1, 3}}, {{0, 0}, {1, 2}}};
  assignments.objects = {{0, 1, 1, 0}, {2, 2, 0, 1}};

  std::ostringstream out;
  mcc::write_assignments_file(assignments, data, out);
  CHECK(out.str() ==
        "record,family,name,view,cluster\n"
        "feature,gaussian,expr_a,0,1\n"
        "feature,gaussian,expr_b,2,0\n"
        "feature,poisson,hits,1,3\n"
        "feature,categorical:3,color,0,0\n"
        "feature,categorical:3,shape,1,2\n"
        "object,,obj_a,0,0\n"
        "object,,obj_b,0,1\n"
        "object,,obj_c,0,1\n"
        "object,,obj_d,0,0\n"
        "object,,obj_a,1,2\n"
        "object,,obj_b,1,2\n"
        "object,,obj_c,1,0\n"
        "object,,obj_d,1,1\n");

  std::istringstream in(out.str());
  const mcc::AssignmentsFile file = mcc::read_assignments_file(in);
  REQUIRE(file.features.size() == 5);
  REQUIRE(file.objects.size() == 8);
  CHECK(file.features[1].family == "gaussian");
  CHECK(file.features[1].name == "expr_b");
  CHECK(file.features[1].view == 2);
  CHECK(file.features[1].cluster == 0);
  CHECK(file.features[4].family == "categorical:3");
  CHECK(file.features[4].cluster == 2);
  CHECK(file.objects[0].id == "obj_a");
  CHECK(file.objects[0].view == 0);
  CHECK(file.objects[0].cluster == 0);
  CHECK(file.objects[6].id == "obj_c");
  CHECK(file.objects[6].view == 1);
  CHECK(file.objects[6].cluster == 0);

  SUBCASE("shape mismatches are rejected at write time") {
    std::ostringstream sink;
    mcc::Assignments short_features = assignments;
    short_features.features.pop_back();
    CHECK_THROWS_AS(mcc::write_assignments_file(short_features, data, sink),
                    std::invalid_argument);

    mcc::Assignments short_columns = assignments;
    short_columns.features[0].pop_back();
    CHECK_THROWS_AS(mcc::write_assignments_file(short_columns, data, sink),
                    std::invalid_argument);

    mcc::Assignments short_objects = assignments;
    short_objects.objects[1].pop_back();
    CHECK_THROWS_AS(mcc::write_assignments_file(short_objects, data, sink),
                    std::invalid_argument);
  }
}

TEST_CASE("read_assignments_file rejects malformed records") {
  const std::string header = "record,family,name,view,cluster\n";

  SUBCASE("empty file") {
    std::istringstream in("");
    CHECK_THROWS_AS(mcc::read_assignments_file(in), ParseError);
  }
  SUBCASE("wrong header") {
    std::istringstream in("record,name,view,cluster\n");
    CHECK_THROWS_AS(mcc::read_assignments_file(in), ParseError);
  }
  SUBCASE("wrong field count") {
    std::istringstream in(header + "feature,gaussian,x,0\n");
    try {
      mcc::read_assignments_file(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(contains_what(e).find("line 2") != std::string::npos);
      CHECK(contains_what(e).find("expected 5 fields, found 4") != std::string::npos);
    }
  }
  SUBCASE("non-integer view") {
    std::istringstream in(header + "object,,o1,first,0\n");
    try {
      mcc::read_assignments_file(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(contains_what(e).find("cannot parse integer 'first'") != std::string::npos);
    }
  }
  SUBCASE("unknown record type") {
    std::istringstream in(header + "row,gaussian,x,0,0\n");
    try {
      mcc::read_assignments_file(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(contains_what(e).find("unknown record type 'row'") != std::string::npos);
    }
  }
}

TEST_CASE("write_summary prints one labeled line per field") {
  mcc::ClusteringResult result;
  result.elbo = -1234.5678901234567;
  result.iterations = 42;
  result.seed = 7;
  result.active_views = 3;
  result.active_object_clusters = {2, 5, 1};

  std::ostringstream out;
  mcc::write_summary(result, mcc::ModelMode::CoClustering, out);
  CHECK(out.str() ==
        "elbo -1234.5678901234567\n"
        "mode coclustering\n"
        "iterations 42\n"
        "seed 7\n"
        "active_views 3\n"
        "object_clusters_view_0 2\n"
        "object_clusters_view_1 5\n"
        "object_clusters_view_2 1\n");
}

TEST_CASE("write_elbo_trace writes one exact value per line") {
  const std::vector<double> trace = {-15.5, -3.0, -2.9999999999999996, 1.0 / 7.0};
  std::ostringstream out;
  mcc::write_elbo_trace(trace, out);

  std::istringstream in(out.str());
  std::string line;
  std::size_t t = 0;
  while (std::getline(in, line)) {
    REQUIRE(t < trace.size());
    CHECK(same_bits(reparse(line), trace[t]));
    ++t;
  }
  CHECK(t == trace.size());
  CHECK(out.str() == "-15.5\n-3\n-2.9999999999999996\n0.14285714285714285\n");
}

TEST_CASE("write then read preserves a generated benchmark dataset") {
  const mcc::Scenario scenario = mcc::benchmark_scenario(40, 4, 0.3, 11);
  auto [data, truth] = mcc::generate(scenario);
  (void)truth;

  std::ostringstream csv, schema;
  mcc::write_dataset_csv(data, csv);
  mcc::write_schema(data, schema);
  std::istringstream csv_in(csv.str()), schema_in(schema.str());
  const Dataset back = mcc::read_dataset(csv_in, schema_in);

  REQUIRE(back.families.size() == data.families.size());
  CHECK(back.object_ids == data.object_ids);
  for (std::size_t m = 0; m < data.families.size(); ++m) {
    CHECK(back.families[m].family == data.families[m].family);
    CHECK(back.families[m].feature_names == data.families[m].feature_names);
    CHECK(back.families[m].observed.cwiseEqual(data.families[m].observed).all());
    const Matrix masked_want =
        data.families[m].values.cwiseProduct(data.families[m].observed);
    const Matrix masked_got =
        back.families[m].values.cwiseProduct(back.families[m].observed);
    CHECK(masked_got.cwiseEqual(masked_want).all());
  }
}
