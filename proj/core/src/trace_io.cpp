#include "promptctl/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace promptctl {

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_trace_csv(const IterationTrace& trace, std::ostream& out) {
  out << kTraceCsvHeader << '\n';
  for (const auto& rec : trace.records) {
    for (std::size_t i = 0; i < trace.schema.size(); ++i) {
      out << rec.step << ',' << trace.schema[i].name << ',' << format_number(rec.observation[i]) << ','
          << format_number(rec.error[i]) << ',' << format_number(rec.control[i]) << ',' << (rec.converged ? 1 : 0)
          << '\n';
    }
  }
}

std::string trace_csv(const IterationTrace& trace) {
  std::ostringstream out;
  write_trace_csv(trace, out);
  return out.str();
}

std::string summary_json(const LoopResult& result) {
  nlohmann::ordered_json j;
  j["seed"] = result.seed;
  j["iterations"] = result.trace.records.size();
  j["converged"] = result.status == LoopStatus::Converged;
  auto final_error = nlohmann::ordered_json::array();
  if (!result.trace.records.empty()) {
    for (double v : result.trace.records.back().error.values) final_error.push_back(v);
  }
  j["final_error"] = final_error;
  j["status"] = std::string(to_string(result.status));
  j["controller"] = result.controller;
  if (result.error_kind) {
    j["error"] = {{"kind", std::string(to_string(*result.error_kind))}, {"message", result.error_message}};
  }
  return j.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Configuration, "cannot write '" + path.string() + "'");
  out << contents;
  if (!out) throw Error(ErrorKind::Configuration, "failed writing '" + path.string() + "'");
}

}  // namespace promptctl
