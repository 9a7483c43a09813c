#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcc/dataset.hpp"
#include "mcc/inference.hpp"

namespace mcc {

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& message) : std::runtime_error(message) {}
};

// Decimal rendering that round-trips doubles exactly.
std::string format_real(double x);

// "gaussian", "poisson", "categorical:H", "multinomial:H"
std::string family_spec(const FeatureFamily& family);
FeatureFamily parse_family_spec(const std::string& spec);

// Dataset CSV: header "object_id,<feature names>"; missing cells are empty
// fields ("NA" is also accepted when reading). The sidecar schema lists
// "<column> <family spec>" per line. Multinomial families have no CSV cell
// encoding and are rejected by both directions.
void write_dataset_csv(const Dataset& dataset, std::ostream& out);
void write_schema(const Dataset& dataset, std::ostream& out);
Dataset read_dataset(std::istream& data_csv, std::istream& schema);

// Assignments CSV: "record,family,name,view,cluster" with one feature row per
// feature and one object row per (object, view).
struct AssignmentsFile {
  struct FeatureRecord {
    std::string family;  // family spec string
    std::string name;
    int view = 0;
    int cluster = 0;
  };
  struct ObjectRecord {
    std::string id;
    int view = 0;
    int cluster = 0;
  };
  std::vector<FeatureRecord> features;
  std::vector<ObjectRecord> objects;
};

void write_assignments_file(const Assignments& assignments, const Dataset& dataset,
                            std::ostream& out);
AssignmentsFile read_assignments_file(std::istream& in);

void write_summary(const ClusteringResult& result, ModelMode mode, std::ostream& out);
void write_elbo_trace(const std::vector<double>& trace, std::ostream& out);

}  // namespace mcc
