#include "sheafid/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sheafid/error.hpp"

namespace sheafid {

using nlohmann::json;

namespace {

const char* const kSheafFormat = "sheafid-sheaf/1";

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    require(ok, ErrorKind::structure, where + ": unknown key '" + key + "'");
  }
}

Mat matrix_from_json(const json& j, int rows, int cols, const std::string& what) {
  require(j.is_array(), ErrorKind::structure, what + " must be a flat row-major array");
  require(j.size() == static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
          ErrorKind::structure,
          what + " has " + std::to_string(j.size()) + " entries, expected " +
              std::to_string(rows * cols));
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const json& v = j[static_cast<std::size_t>(r * cols + c)];
      require(v.is_number(), ErrorKind::structure, what + " entries must be numbers");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

json matrix_to_json(const Mat& m) {
  json arr = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
  }
  return arr;
}

int as_dim(const json& j, const std::string& what) {
  require(j.is_number_integer() && j.get<long long>() >= 0, ErrorKind::structure,
          what + " must be a non-negative integer");
  return static_cast<int>(j.get<long long>());
}

}  // namespace

Sheaf parse_sheaf(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::structure, std::string("sheaf file is not valid JSON: ") + e.what());
  }
  require(doc.is_object(), ErrorKind::structure, "sheaf file must hold a JSON object");
  reject_unknown_keys(doc, {"format", "vertex_count", "vertex_stalk_dims", "vertex_grams", "edges"},
                      "sheaf");
  if (doc.contains("format")) {
    require(doc["format"] == kSheafFormat, ErrorKind::structure,
            "unsupported sheaf format tag (expected " + std::string(kSheafFormat) + ")");
  }
  require(doc.contains("vertex_count") && doc.contains("vertex_stalk_dims") && doc.contains("edges"),
          ErrorKind::structure, "sheaf needs vertex_count, vertex_stalk_dims and edges");

  Sheaf s;
  s.graph.vertex_count = static_cast<std::size_t>(as_dim(doc["vertex_count"], "vertex_count"));
  const json& dims = doc["vertex_stalk_dims"];
  require(dims.is_array() && dims.size() == s.graph.vertex_count, ErrorKind::structure,
          "vertex_stalk_dims must list one dimension per vertex");
  for (const json& d : dims) s.vertex_dims.push_back(as_dim(d, "vertex stalk dimension"));

  if (doc.contains("vertex_grams")) {
    const json& grams = doc["vertex_grams"];
    require(grams.is_array() && grams.size() == s.graph.vertex_count, ErrorKind::structure,
            "vertex_grams must list one matrix per vertex");
    for (std::size_t v = 0; v < grams.size(); ++v) {
      s.vertex_grams.push_back(matrix_from_json(grams[v], s.vertex_dims[v], s.vertex_dims[v],
                                                "vertex_grams[" + std::to_string(v) + "]"));
    }
  }

  const json& edges = doc["edges"];
  require(edges.is_array(), ErrorKind::structure, "edges must be an array");
  bool any_gram = false;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const json& ej = edges[e];
    const std::string tag = "edges[" + std::to_string(e) + "]";
    require(ej.is_object(), ErrorKind::structure, tag + " must be an object");
    reject_unknown_keys(ej, {"tail", "head", "dim", "head_map", "tail_map", "gram"}, tag);
    require(ej.contains("tail") && ej.contains("head") && ej.contains("dim") &&
                ej.contains("head_map") && ej.contains("tail_map"),
            ErrorKind::structure, tag + " needs tail, head, dim, head_map and tail_map");
    Edge ed;
    ed.tail = static_cast<std::size_t>(as_dim(ej["tail"], tag + ".tail"));
    ed.head = static_cast<std::size_t>(as_dim(ej["head"], tag + ".head"));
    require(ed.tail < s.graph.vertex_count && ed.head < s.graph.vertex_count, ErrorKind::structure,
            tag + ": vertex id out of range");
    const int dim = as_dim(ej["dim"], tag + ".dim");
    s.graph.edges.push_back(ed);
    s.edge_dims.push_back(dim);
    s.head_maps.push_back(matrix_from_json(ej["head_map"], dim, s.vertex_dims[ed.head], tag + ".head_map"));
    s.tail_maps.push_back(matrix_from_json(ej["tail_map"], dim, s.vertex_dims[ed.tail], tag + ".tail_map"));
    if (ej.contains("gram")) {
      any_gram = true;
      s.edge_grams.push_back(matrix_from_json(ej["gram"], dim, dim, tag + ".gram"));
    } else {
      s.edge_grams.push_back(Mat::Identity(dim, dim));
    }
  }
  if (!any_gram) s.edge_grams.clear();
  s.validate();
  return s;
}

std::string serialize_sheaf(const Sheaf& sheaf) {
  Sheaf s = sheaf;
  s.validate();
  json doc;
  doc["format"] = kSheafFormat;
  doc["vertex_count"] = s.graph.vertex_count;
  doc["vertex_stalk_dims"] = s.vertex_dims;
  json vg = json::array();
  for (const Mat& g : s.vertex_grams) vg.push_back(matrix_to_json(g));
  doc["vertex_grams"] = vg;
  json edges = json::array();
  for (std::size_t e = 0; e < s.graph.edges.size(); ++e) {
    json ej;
    ej["tail"] = s.graph.edges[e].tail;
    ej["head"] = s.graph.edges[e].head;
    ej["dim"] = s.edge_dims[e];
    ej["head_map"] = matrix_to_json(s.head_maps[e]);
    ej["tail_map"] = matrix_to_json(s.tail_maps[e]);
    ej["gram"] = matrix_to_json(s.edge_grams[e]);
    edges.push_back(ej);
  }
  doc["edges"] = edges;
  return doc.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write '" + path + "'");
  out << text;
  require(static_cast<bool>(out), ErrorKind::io, "write to '" + path + "' failed");
}

Sheaf load_sheaf(const std::string& path) { return parse_sheaf(read_text_file(path)); }

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const CsvComments& comments) {
  for (const auto& [k, v] : comments) out << "# " << k << "=" << v << "\n";
  const std::size_t d = traj.dim();
  const bool with_derivs = traj.has_derivs();
  out << "t";
  for (std::size_t i = 0; i < d; ++i) out << ",x" << i;
  if (with_derivs) {
    for (std::size_t i = 0; i < d; ++i) out << ",dx" << i;
  }
  out << "\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << format_double(traj.times[k]);
    for (Eigen::Index i = 0; i < traj.states[k].size(); ++i) out << ',' << format_double(traj.states[k](i));
    if (with_derivs) {
      for (Eigen::Index i = 0; i < traj.derivs[k].size(); ++i) out << ',' << format_double(traj.derivs[k](i));
    }
    out << "\n";
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj, const CsvComments& comments) {
  std::ostringstream ss;
  write_trajectory_csv(ss, traj, comments);
  write_text_file(path, ss.str());
}

Trajectory read_trajectory_csv(std::istream& in, CsvComments* comments) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (comments) {
        const auto body = line.substr(1);
        const auto eq = body.find('=');
        if (eq != std::string::npos) {
          std::string key = body.substr(0, eq);
          key.erase(0, key.find_first_not_of(' '));
          (*comments)[key] = body.substr(eq + 1);
        }
      }
      continue;
    }
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
    break;
  }
  require(!header.empty() && header[0] == "t", ErrorKind::io, "trajectory CSV must start with a 't' column");
  std::size_t nx = 0;
  std::size_t ndx = 0;
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i].rfind("dx", 0) == 0) {
      ++ndx;
    } else {
      require(header[i].rfind('x', 0) == 0 && ndx == 0, ErrorKind::io,
              "unexpected trajectory CSV column '" + header[i] + "'");
      ++nx;
    }
  }
  require(ndx == 0 || ndx == nx, ErrorKind::io, "derivative columns must match state columns");

  Trajectory traj;
  const auto cols = header.size();
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> vals;
    vals.reserve(cols);
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t next = line.find(',', pos);
      const std::string cell = line.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
        require(used == cell.size(), ErrorKind::io, "");
      } catch (...) {
        fail(ErrorKind::io, "bad number '" + cell + "' on trajectory CSV line " + std::to_string(line_no));
      }
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    require(vals.size() == cols, ErrorKind::io,
            "trajectory CSV line " + std::to_string(line_no) + " has the wrong column count");
    traj.times.push_back(vals[0]);
    traj.states.push_back(Eigen::Map<const Vec>(vals.data() + 1, static_cast<Eigen::Index>(nx)));
    if (ndx > 0) {
      traj.derivs.push_back(Eigen::Map<const Vec>(vals.data() + 1 + nx, static_cast<Eigen::Index>(ndx)));
    }
  }
  for (std::size_t k = 1; k < traj.size(); ++k) {
    require(traj.times[k] > traj.times[k - 1], ErrorKind::io, "trajectory times must increase");
  }
  return traj;
}

Trajectory read_trajectory_csv(const std::string& path, CsvComments* comments) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open '" + path + "'");
  return read_trajectory_csv(in, comments);
}

}  // namespace sheafid
