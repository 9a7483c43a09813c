#include "mcc/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace mcc {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

void check_field_text(const std::string& text, const char* what) {
  if (text.empty() || text.find(',') != std::string::npos ||
      text.find('\n') != std::string::npos || text.find_first_of(" \t") != std::string::npos)
    throw std::invalid_argument(std::string(what) + " '" + text +
                                "' must be nonempty and free of commas and whitespace");
}

double parse_real(const std::string& field, int line_number) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ParseError("line " + std::to_string(line_number) + ": cannot parse value '" +
                     field + "'");
  return value;
}

int parse_int(const std::string& field, int line_number) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const long value = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0')
    throw ParseError("line " + std::to_string(line_number) + ": cannot parse integer '" +
                     field + "'");
  return static_cast<int>(value);
}

bool is_missing(const std::string& field) { return field.empty() || field == "NA"; }

}  // namespace

std::string format_real(double x) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", x);
  return buffer;
}

std::string family_spec(const FeatureFamily& family) {
  switch (family.kind) {
    case FamilyKind::Gaussian: return "gaussian";
    case FamilyKind::Poisson: return "poisson";
    case FamilyKind::Categorical:
      return "categorical:" + std::to_string(family.num_categories);
    case FamilyKind::Multinomial:
      return "multinomial:" + std::to_string(family.num_categories);
  }
  return "unknown";
}

FeatureFamily parse_family_spec(const std::string& spec) {
  if (spec == "gaussian") return {FamilyKind::Gaussian, 0};
  if (spec == "poisson") return {FamilyKind::Poisson, 0};
  if (spec.rfind("categorical:", 0) == 0) {
    const int h = std::atoi(spec.c_str() + 12);
    if (h < 2) throw ParseError("categorical spec needs at least 2 categories: " + spec);
    return {FamilyKind::Categorical, h};
  }
  throw ParseError("unknown family spec '" + spec +
                   "' (expected gaussian, poisson, or categorical:H)");
}

void write_dataset_csv(const Dataset& dataset, std::ostream& out) {
  out << "object_id";
  for (const FamilyData& fam : dataset.families) {
    if (fam.family.kind == FamilyKind::Multinomial)
      throw std::invalid_argument("multinomial families have no CSV cell encoding");
    for (const std::string& name : fam.feature_names) {
      check_field_text(name, "feature name");
      out << ',' << name;
    }
  }
  out << '\n';
  for (Index i = 0; i < dataset.n_objects(); ++i) {
    check_field_text(dataset.object_ids[i], "object id");
    out << dataset.object_ids[i];
    for (const FamilyData& fam : dataset.families)
      for (Index j = 0; j < fam.cols(); ++j) {
        out << ',';
        if (fam.is_observed(i, j)) out << format_real(fam.values(i, j));
      }
    out << '\n';
  }
}

void write_schema(const Dataset& dataset, std::ostream& out) {
  for (const FamilyData& fam : dataset.families) {
    if (fam.family.kind == FamilyKind::Multinomial)
      throw std::invalid_argument("multinomial families have no CSV cell encoding");
    for (const std::string& name : fam.feature_names)
      out << name << ' ' << family_spec(fam.family) << '\n';
  }
}

Dataset read_dataset(std::istream& data_csv, std::istream& schema) {
  std::map<std::string, FeatureFamily> column_family;
  {
    std::string line;
    int line_number = 0;
    while (next_line(schema, line)) {
      ++line_number;
      if (line.empty()) continue;
      std::istringstream fields(line);
      std::string name, spec, extra;
      fields >> name >> spec;
      if (spec.empty())
        throw ParseError("schema line " + std::to_string(line_number) +
                         ": expected '<column> <family>'");
      if (fields >> extra)
        throw ParseError("schema line " + std::to_string(line_number) +
                         ": unexpected trailing text");
      if (!column_family.emplace(name, parse_family_spec(spec)).second)
        throw ParseError("schema line " + std::to_string(line_number) +
                         ": duplicate column '" + name + "'");
    }
  }

  std::string line;
  if (!next_line(data_csv, line)) throw ParseError("data file is empty");
  const std::vector<std::string> header = split_fields(line);
  if (header.empty() || header[0] != "object_id")
    throw ParseError("data header must start with 'object_id'");

  Dataset dataset;
  std::vector<std::pair<int, Index>> column_slot(header.size() - 1);  // (family, j)
  std::map<std::string, int> family_of_spec;
  std::vector<std::vector<std::size_t>> family_columns;  // CSV column per (family, j)
  for (std::size_t c = 1; c < header.size(); ++c) {
    const auto entry = column_family.find(header[c]);
    if (entry == column_family.end())
      throw ParseError("column '" + header[c] + "' is not declared in the schema");
    const std::string spec = family_spec(entry->second);
    const auto [it, inserted] =
        family_of_spec.emplace(spec, static_cast<int>(dataset.families.size()));
    if (inserted) {
      FamilyData fam;
      fam.family = entry->second;
      dataset.families.push_back(std::move(fam));
      family_columns.emplace_back();
    }
    const int m = it->second;
    column_slot[c - 1] = {m, static_cast<Index>(dataset.families[m].feature_names.size())};
    dataset.families[m].feature_names.push_back(header[c]);
    family_columns[m].push_back(c);
    column_family.erase(entry);
  }
  if (!column_family.empty())
    throw ParseError("schema declares column '" + column_family.begin()->first +
                     "' which is not present in the data");

  std::vector<std::vector<std::string>> rows;
  int line_number = 1;
  while (next_line(data_csv, line)) {
    ++line_number;
    if (line.empty()) continue;
    std::vector<std::string> fields = split_fields(line);
    if (fields.size() != header.size())
      throw ParseError("line " + std::to_string(line_number) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    dataset.object_ids.push_back(fields[0]);
    rows.push_back(std::move(fields));
  }

  const Index n = dataset.n_objects();
  for (std::size_t m = 0; m < dataset.families.size(); ++m) {
    FamilyData& fam = dataset.families[m];
    const Index d = static_cast<Index>(fam.feature_names.size());
    fam.values = Matrix::Zero(n, d);
    fam.observed = Matrix::Ones(n, d);
  }
  for (Index i = 0; i < n; ++i)
    for (std::size_t c = 1; c < header.size(); ++c) {
      const auto [m, j] = column_slot[c - 1];
      const std::string& field = rows[i][c];
      if (is_missing(field)) {
        dataset.families[m].observed(i, j) = 0.0;
      } else {
        dataset.families[m].values(i, j) = parse_real(field, static_cast<int>(i) + 2);
      }
    }
  return dataset;
}

void write_assignments_file(const Assignments& assignments, const Dataset& dataset,
                            std::ostream& out) {
  if (assignments.features.size() != dataset.families.size())
    throw std::invalid_argument("assignments do not match the dataset's families");
  out << "record,family,name,view,cluster\n";
  for (std::size_t m = 0; m < dataset.families.size(); ++m) {
    const FamilyData& fam = dataset.families[m];
    if (assignments.features[m].size() != static_cast<std::size_t>(fam.cols()))
      throw std::invalid_argument("assignments do not match the dataset's features");
    for (Index j = 0; j < fam.cols(); ++j) {
      const FeatureAssignment& a = assignments.features[m][j];
      out << "feature," << family_spec(fam.family) << ',' << fam.feature_names[j] << ','
          << a.view << ',' << a.cluster << '\n';
    }
  }
  for (std::size_t v = 0; v < assignments.objects.size(); ++v) {
    if (assignments.objects[v].size() != static_cast<std::size_t>(dataset.n_objects()))
      throw std::invalid_argument("assignments do not match the dataset's objects");
    for (Index i = 0; i < dataset.n_objects(); ++i)
      out << "object,," << dataset.object_ids[i] << ',' << v << ','
          << assignments.objects[v][i] << '\n';
  }
}

AssignmentsFile read_assignments_file(std::istream& in) {
  std::string line;
  if (!next_line(in, line)) throw ParseError("assignments file is empty");
  if (line != "record,family,name,view,cluster")
    throw ParseError("unexpected assignments header: " + line);
  AssignmentsFile file;
  int line_number = 1;
  while (next_line(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != 5)
      throw ParseError("line " + std::to_string(line_number) +
                       ": expected 5 fields, found " + std::to_string(fields.size()));
    const int view = parse_int(fields[3], line_number);
    const int cluster = parse_int(fields[4], line_number);
    if (fields[0] == "feature") {
      file.features.push_back({fields[1], fields[2], view, cluster});
    } else if (fields[0] == "object") {
      file.objects.push_back({fields[2], view, cluster});
    } else {
      throw ParseError("line " + std::to_string(line_number) + ": unknown record type '" +
                       fields[0] + "'");
    }
  }
  return file;
}

void write_summary(const ClusteringResult& result, ModelMode mode, std::ostream& out) {
  out << "elbo " << format_real(result.elbo) << '\n';
  out << "mode " << mode_name(mode) << '\n';
  out << "iterations " << result.iterations << '\n';
  out << "seed " << result.seed << '\n';
  out << "active_views " << result.active_views << '\n';
  for (std::size_t v = 0; v < result.active_object_clusters.size(); ++v)
    out << "object_clusters_view_" << v << ' ' << result.active_object_clusters[v] << '\n';
}

void write_elbo_trace(const std::vector<double>& trace, std::ostream& out) {
  for (double value : trace) out << format_real(value) << '\n';
}

}  // namespace mcc
