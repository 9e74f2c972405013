#include "hstab/report.hpp"

#include <cstdio>
#include <fstream>

#include "hstab/errors.hpp"

namespace hstab {

namespace {

std::string sci(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*e", digits, v);
  return buf;
}

}  // namespace

std::string to_csv(const std::vector<ScalingReport>& reports) {
  std::string out = csv_header();
  out += '\n';
  for (const ScalingReport& rep : reports) {
    const char* verdict = rep.pass ? "pass" : "fail";
    for (const ScalingPoint& pt : rep.points) {
      out += rep.quantity;
      out += ',';
      out += sci(pt.eps, 6);
      out += ',';
      out += sci(pt.value, 12);
      out += ',';
      out += sci(pt.err_estimate, 6);
      out += ',';
      out += sci(rep.slope, 6);
      out += ',';
      out += sci(rep.predicted, 6);
      out += ',';
      out += verdict;
      out += '\n';
    }
  }
  return out;
}

nlohmann::ordered_json to_json(const ScalingReport& rep) {
  nlohmann::ordered_json j;
  j["quantity"] = rep.quantity;
  j["slope"] = rep.slope;
  j["intercept"] = rep.intercept;
  j["residual"] = rep.residual;
  j["log_q"] = rep.log_q;
  j["predicted"] = rep.predicted;
  j["tolerance"] = rep.tolerance;
  j["sense"] = std::string(1, rep.sense);
  j["pass"] = rep.pass;
  j["points"] = nlohmann::ordered_json::array();
  for (const ScalingPoint& pt : rep.points)
    j["points"].push_back({{"eps", pt.eps}, {"value", pt.value}, {"err_estimate", pt.err_estimate}});
  return j;
}

nlohmann::ordered_json to_json(const FitResult& fit) {
  nlohmann::ordered_json j;
  j["gauges"] = nlohmann::ordered_json::array();
  for (const Gauge& g : fit.gauges)
    j["gauges"].push_back({{"lambda", g.lambda}, {"t", g.xi.t}});
  j["distance"] = fit.distance;
  j["residuals"] = fit.residuals;
  j["deficit"] = fit.deficit;
  j["eps"] = fit.eps;
  j["converged"] = fit.converged;
  j["collision"] = fit.collision;
  j["iterations"] = fit.trace.size();
  j["trace"] = nlohmann::ordered_json::array();
  for (const FitIteration& it : fit.trace)
    j["trace"].push_back({{"iter", it.iter},
                          {"distance", it.distance},
                          {"max_residual", it.max_residual},
                          {"step", it.step}});
  return j;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace hstab
