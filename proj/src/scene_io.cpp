#include "cyltri/scene_io.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace cyltri {

namespace {

using nlohmann::json;

json parse_document(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    fail(ErrorCode::SchemaError, "document is not well-formed");
  }
  if (!j.is_object()) fail(ErrorCode::SchemaError, "top level must be an object");
  return j;
}

const json& field(const json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) {
    fail(ErrorCode::SchemaError, where + " is missing '" + key + "'");
  }
  return *it;
}

std::vector<double> number_array(const json& j, size_t n, const std::string& where) {
  if (!j.is_array() || j.size() != n) {
    fail(ErrorCode::SchemaError,
         where + " must be an array of " + std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  for (const json& v : j) {
    if (!v.is_number()) {
      fail(ErrorCode::SchemaError,
           where + " must be an array of " + std::to_string(n) + " numbers");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

std::map<std::string, std::string> string_map(const json& j, const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::SchemaError, where + " must be an object");
  std::map<std::string, std::string> out;
  for (const auto& [key, value] : j.items()) {
    if (value.is_string()) {
      out[key] = value.get<std::string>();
    } else if (value.is_number() || value.is_boolean()) {
      out[key] = value.dump();
    } else {
      fail(ErrorCode::SchemaError, where + "." + key + " must be a scalar");
    }
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path + " for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorCode::IoError, "failed reading " + path);
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
  out << text;
  if (!out) fail(ErrorCode::IoError, "failed writing " + path);
}

}  // namespace

std::optional<double> SceneFile::focal_length() const {
  const auto it = metadata.find("focal_length");
  if (it == metadata.end()) return std::nullopt;
  try {
    size_t used = 0;
    const double f = std::stod(it->second, &used);
    if (used != it->second.size() || !(f > 0)) return std::nullopt;
    return f;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

SceneFile scene_from_json(const std::string& text) {
  const json j = parse_document(text);
  SceneFile scene;

  const json& cams = field(j, "cameras", "scene");
  if (!cams.is_array() || cams.empty()) {
    fail(ErrorCode::SchemaError, "scene needs at least one camera");
  }
  std::map<std::string, int> index_of;
  for (size_t i = 0; i < cams.size(); ++i) {
    const std::string where = "camera " + std::to_string(i);
    const json& c = cams[i];
    if (!c.is_object()) fail(ErrorCode::SchemaError, where + " must be an object");
    const json& idj = field(c, "id", where);
    if (!idj.is_string()) fail(ErrorCode::SchemaError, where + ".id must be a string");
    const std::string id = idj.get<std::string>();
    if (index_of.count(id)) {
      fail(ErrorCode::SchemaError, "duplicate camera id '" + id + "'");
    }
    const std::vector<double> p = number_array(field(c, "P", where), 12, where + ".P");
    Mat34 P;
    for (int r = 0; r < 3; ++r) {
      for (int col = 0; col < 4; ++col) P(r, col) = p[4 * r + col];
    }
    try {
      scene.cameras.push_back(make_camera(P, id));
    } catch (const Error& e) {
      fail(ErrorCode::SchemaError,
           where + " ('" + id + "') has an invalid projection: " + e.what());
    }
    index_of[id] = static_cast<int>(i);
  }

  if (j.contains("lines")) {
    const json& ls = j["lines"];
    if (!ls.is_array()) fail(ErrorCode::SchemaError, "scene.lines must be an array");
    for (size_t i = 0; i < ls.size(); ++i) {
      const std::string where = "line " + std::to_string(i);
      const json& l = ls[i];
      if (!l.is_object()) fail(ErrorCode::SchemaError, where + " must be an object");
      const json& cidj = field(l, "camera_id", where);
      if (!cidj.is_string()) {
        fail(ErrorCode::SchemaError, where + ".camera_id must be a string");
      }
      const std::string cid = cidj.get<std::string>();
      const auto it = index_of.find(cid);
      if (it == index_of.end()) {
        fail(ErrorCode::SchemaError, where + " references unknown camera '" + cid + "'");
      }
      const std::vector<double> lv = number_array(field(l, "l", where), 3, where + ".l");
      std::optional<int> group;
      if (l.contains("group")) {
        if (!l["group"].is_number_integer()) {
          fail(ErrorCode::SchemaError, where + ".group must be an integer");
        }
        group = l["group"].get<int>();
      }
      try {
        scene.lines.push_back(make_image_line(Eigen::Vector3d(lv[0], lv[1], lv[2]),
                                              it->second, group, group));
      } catch (const Error& e) {
        fail(ErrorCode::SchemaError, where + " is invalid: " + e.what());
      }
    }
  }

  if (j.contains("metadata")) {
    scene.metadata = string_map(j["metadata"], "scene.metadata");
  }
  return scene;
}

std::string scene_to_json(const SceneFile& scene) {
  json j;
  j["cameras"] = json::array();
  for (const Camera& cam : scene.cameras) {
    json c;
    c["id"] = cam.id;
    json p = json::array();
    for (int r = 0; r < 3; ++r) {
      for (int col = 0; col < 4; ++col) p.push_back(cam.P(r, col));
    }
    c["P"] = p;
    j["cameras"].push_back(c);
  }
  j["lines"] = json::array();
  for (const ImageLine& line : scene.lines) {
    json l;
    l["camera_id"] = scene.cameras.at(line.camera).id;
    l["l"] = {line.l(0), line.l(1), line.l(2)};
    const std::optional<int> group = line.pair ? line.pair : line.label;
    if (group) l["group"] = *group;
    j["lines"].push_back(l);
  }
  if (!scene.metadata.empty()) j["metadata"] = scene.metadata;
  return j.dump(2) + "\n";
}

ResultFile result_from_json(const std::string& text) {
  const json j = parse_document(text);
  ResultFile result;
  if (j.contains("config")) result.config = string_map(j["config"], "result.config");
  const json& cyls = field(j, "cylinders", "result");
  if (!cyls.is_array()) fail(ErrorCode::SchemaError, "result.cylinders must be an array");
  for (size_t i = 0; i < cyls.size(); ++i) {
    const std::string where = "cylinder " + std::to_string(i);
    const json& c = cyls[i];
    if (!c.is_object()) fail(ErrorCode::SchemaError, where + " must be an object");
    ResultEntry e;
    const auto dir = number_array(field(c, "direction", where), 3, where + ".direction");
    e.direction = {dir[0], dir[1], dir[2]};
    if (!(e.direction.norm() > 0)) {
      fail(ErrorCode::SchemaError, where + ".direction must be non-zero");
    }
    e.direction.normalize();
    const auto ap = number_array(field(c, "axis_point", where), 3, where + ".axis_point");
    e.axis_point = {ap[0], ap[1], ap[2]};
    const json& rj = field(c, "radius", where);
    if (!rj.is_number()) fail(ErrorCode::SchemaError, where + ".radius must be a number");
    e.radius = rj.get<double>();
    if (c.contains("inlier_lines")) {
      const json& ids = c["inlier_lines"];
      if (!ids.is_array()) {
        fail(ErrorCode::SchemaError, where + ".inlier_lines must be an array");
      }
      for (const json& v : ids) {
        if (!v.is_number_integer()) {
          fail(ErrorCode::SchemaError, where + ".inlier_lines must hold integers");
        }
        e.inlier_lines.push_back(v.get<int>());
      }
    }
    if (c.contains("residuals")) {
      const json& r = c["residuals"];
      if (!r.is_object()) fail(ErrorCode::SchemaError, where + ".residuals must be an object");
      if (r.contains("max_defect")) e.max_defect = r["max_defect"].get<double>();
      if (r.contains("mean_defect")) e.mean_defect = r["mean_defect"].get<double>();
      if (r.contains("max_defect_px")) e.max_defect_px = r["max_defect_px"].get<double>();
      if (r.contains("mean_defect_px")) e.mean_defect_px = r["mean_defect_px"].get<double>();
    }
    if (c.contains("method")) e.method = c["method"].get<std::string>();
    if (c.contains("conic_class")) e.conic_class = c["conic_class"].get<std::string>();
    result.cylinders.push_back(e);
  }
  return result;
}

std::string result_to_json(const ResultFile& result) {
  json j;
  if (!result.config.empty()) j["config"] = result.config;
  j["cylinders"] = json::array();
  for (const ResultEntry& e : result.cylinders) {
    json c;
    c["direction"] = {e.direction(0), e.direction(1), e.direction(2)};
    c["axis_point"] = {e.axis_point(0), e.axis_point(1), e.axis_point(2)};
    c["radius"] = e.radius;
    c["inlier_lines"] = e.inlier_lines;
    json r;
    r["max_defect"] = e.max_defect;
    r["mean_defect"] = e.mean_defect;
    if (e.max_defect_px) r["max_defect_px"] = *e.max_defect_px;
    if (e.mean_defect_px) r["mean_defect_px"] = *e.mean_defect_px;
    c["residuals"] = r;
    c["method"] = e.method;
    c["conic_class"] = e.conic_class;
    j["cylinders"].push_back(c);
  }
  return j.dump(2) + "\n";
}

SceneFile load_scene(const std::string& path) { return scene_from_json(read_file(path)); }

void save_scene(const SceneFile& scene, const std::string& path) {
  write_file(path, scene_to_json(scene));
}

ResultFile load_result(const std::string& path) {
  return result_from_json(read_file(path));
}

void save_result(const ResultFile& result, const std::string& path) {
  write_file(path, result_to_json(result));
}

}  // namespace cyltri
