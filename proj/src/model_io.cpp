#include "nykrls/model_io.hpp"

#include <fstream>

#include <json.hpp>

namespace nykrls {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty())
    throw DataError("model file: landmark matrix must be a nonempty array");
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = static_cast<Eigen::Index>(rows.at(0).size());
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& row = rows.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != d)
      throw DataError("model file: ragged landmark matrix");
    for (Eigen::Index j = 0; j < d; ++j)
      m(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
  }
  return m;
}

}  // namespace

std::string model_to_json(const NystromModel& model) {
  json j;
  j["format"] = "nystrom-model/1";
  j["kernel"] = {{"family", "gaussian"}, {"sigma", model.kernel.sigma}};
  j["lambda"] = model.lambda;
  j["m"] = model.count();
  j["landmarks"] = matrix_to_json(model.landmarks);
  json alpha = json::array();
  for (Eigen::Index i = 0; i < model.alpha.size(); ++i) alpha.push_back(model.alpha(i));
  j["alpha"] = std::move(alpha);
  return j.dump(2);
}

NystromModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: invalid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "nystrom-model/1")
      throw DataError("model file: unknown format tag");
    if (j.at("kernel").at("family").get<std::string>() != "gaussian")
      throw DataError("model file: unknown kernel family");
    NystromModel model;
    model.kernel.family = KernelFamily::Gaussian;
    model.kernel.sigma = j.at("kernel").at("sigma").get<double>();
    model.lambda = j.at("lambda").get<double>();
    model.landmarks = matrix_from_json(j.at("landmarks"));
    const json& alpha = j.at("alpha");
    model.alpha.resize(static_cast<Eigen::Index>(alpha.size()));
    for (Eigen::Index i = 0; i < model.alpha.size(); ++i)
      model.alpha(i) = alpha.at(static_cast<std::size_t>(i)).get<double>();
    if (model.alpha.size() != model.landmarks.rows())
      throw DataError("model file: coefficient count does not match landmark count");
    validate(model.kernel);
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: missing or malformed field: ") + e.what());
  }
}

void save_model(const NystromModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << model_to_json(model) << '\n';
  if (!out) throw DataError("write failed for '" + path + "'");
}

NystromModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return model_from_json(text);
}

}  // namespace nykrls
