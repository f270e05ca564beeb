#pragma once

#include <string>
#include <vector>

#include "twdglm/graph.hpp"
#include "twdglm/inference.hpp"
#include "twdglm/optimizer.hpp"
#include "twdglm/tuning.hpp"

namespace twdglm {

// Edge list: one "a<TAB>b" pair or a lone label per line, '#' comments.
ArealGraph load_graph(const std::string& path);
// Lone labels first, so vertex order survives a round trip.
void write_graph(const std::string& path, const ArealGraph& g);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> lines;  // raw text per data row
  int column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
// Header plus the raw lines of the chosen rows.
void write_csv_rows(const std::string& path, const CsvTable& t, const std::vector<int>& rows);

struct DesignLayout {
  std::vector<std::string> x_names;
  std::vector<std::string> z_names;
};

// Columns y, vertex, optional exposure, x_* and z_*. With `expand`, text
// columns become dummies for every sorted level except the last. A layout
// fixes the design columns instead (names "col=level" are indicators).
Dataset dataset_from_table(const CsvTable& t, const ArealGraph& g, const FamilySpec& spec, bool expand,
                           const DesignLayout* layout = nullptr);
Dataset load_dataset(const std::string& path, const ArealGraph& g, const FamilySpec& spec, bool expand = false,
                     const DesignLayout* layout = nullptr);
void write_dataset(const std::string& path, const Dataset& d, const ArealGraph& g);

struct CoefFile {
  FamilySpec spec;
  Links links;
  Coefficients theta;
  std::vector<std::string> x_names;
  std::vector<std::string> alpha_labels;
  std::vector<std::string> z_names;
};

void write_coefficients(const std::string& path, const CoefFile& c);
CoefFile read_coefficients(const std::string& path);

void write_wald(const std::string& path, const std::vector<WaldRow>& rows);
void write_trace(const std::string& path, const FitResult& f);
void write_surface(const std::string& path, const std::vector<GridCell>& surface);
std::vector<GridCell> read_surface(const std::string& path);

void write_text(const std::string& path, const std::string& text);

}  // namespace twdglm
