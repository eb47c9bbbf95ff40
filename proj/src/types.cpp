#include "varpro/types.hpp"

#include <json.hpp>

namespace varpro {

Eigen::MatrixXd HessianBlocks::full() const {
  const int np = p();
  const int nq = q();
  Eigen::MatrixXd H(np + nq, np + nq);
  H.topLeftCorner(np, np) = A;
  H.topRightCorner(np, nq) = B.transpose();
  H.bottomLeftCorner(nq, np) = B;
  H.bottomRightCorner(nq, nq) = D;
  return H;
}

std::string to_string(const Inertia& in) {
  return "(" + std::to_string(in.n_plus) + ", " + std::to_string(in.n_minus) + ", " +
         std::to_string(in.n_zero) + ")";
}

std::string to_string(PointClass c) {
  switch (c) {
    case PointClass::Minimum:
      return "Minimum";
    case PointClass::Maximum:
      return "Maximum";
    case PointClass::Saddle:
      return "Saddle";
    case PointClass::Degenerate:
      return "Degenerate";
  }
  return "Degenerate";
}

namespace {

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

nlohmann::json inertia_to_json(const Inertia& in) {
  return {{"n_plus", in.n_plus}, {"n_minus", in.n_minus}, {"n_zero", in.n_zero}};
}

}  // namespace

std::string StationaryPointReport::to_json(int indent) const {
  nlohmann::json j;
  j["x"] = vector_to_json(x);
  j["y_star"] = vector_to_json(y_star);
  j["grad_norm_full"] = grad_norm_full;
  j["grad_norm_reduced"] = grad_norm_reduced;
  j["inertia_full"] = inertia_to_json(inertia_full);
  j["inertia_reduced"] = inertia_to_json(inertia_reduced);
  j["class_full"] = to_string(class_full);
  j["class_reduced"] = to_string(class_reduced);
  j["haynsworth_ok"] = haynsworth_ok;
  return j.dump(indent);
}

}  // namespace varpro
