#pragma once

// File formats.
//
// Sheaf description (JSON):
//   {
//     "format": "sheafid-sheaf/1",
//     "vertex_count": 2,
//     "vertex_stalk_dims": [2, 2],
//     "vertex_grams": [[1,0,0,1], [1,0,0,1]],        // optional, row-major
//     "edges": [
//       {"tail": 0, "head": 1, "dim": 2,
//        "head_map": [1,0,0,1], "tail_map": [1,0,0,1],  // row-major, dim x stalk dim
//        "gram": [1,0,0,1]}                              // optional, row-major
//     ]
//   }
//
// Trajectory CSV: optional leading "# key=value" comment lines, then a header
//   t,x0,...,x{d-1}[,dx0,...,dx{d-1}]
// and one row per sample. Numbers are written with 17 significant digits.

#include <iosfwd>
#include <map>
#include <string>

#include "sheafid/dynamics.hpp"
#include "sheafid/sheaf.hpp"

namespace sheafid {

Sheaf parse_sheaf(const std::string& text);
std::string serialize_sheaf(const Sheaf& sheaf);
Sheaf load_sheaf(const std::string& path);

std::string format_double(double v);

using CsvComments = std::map<std::string, std::string>;

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const CsvComments& comments = {});
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const CsvComments& comments = {});
Trajectory read_trajectory_csv(std::istream& in, CsvComments* comments = nullptr);
Trajectory read_trajectory_csv(const std::string& path, CsvComments* comments = nullptr);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace sheafid
