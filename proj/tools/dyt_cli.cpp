// Command-line driver.
//
//   dyt verify classical|quantize|compose <doc.json>
//       [--hbar N] [--jet D] [--out twist.json] [--report json|text]
//       [--report-file path]
//
// Exit codes: 0 = all checks pass, 1 = a mathematical check failed
// (witness embedded in the report), 2 = input or internal error.
// Worker count is controlled by OMP_NUM_THREADS only.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dyt/pipeline.hpp"

using namespace dyt;

int main(int argc, char** argv) {
  CLI::App app{"exact verifier for dynamical Yang-Baxter structures and their twists"};
  app.require_subcommand(1);

  auto* verify = app.add_subcommand("verify", "run a verification pipeline on a document");
  std::string pipeline, docpath, outpath, report_kind = "text", report_file;
  int hbar_override = -1, jet_override = -1;
  verify->add_option("pipeline", pipeline, "classical | quantize | compose")->required();
  verify->add_option("document", docpath, "instance document (.json)")->required();
  verify->add_option("--hbar", hbar_override, "override truncation.hbar_order");
  verify->add_option("--jet", jet_override, "override truncation.jet_order");
  verify->add_option("--out", outpath, "write the twist artifact here (quantize)");
  verify->add_option("--report", report_kind, "report format: json | text")
      ->check(CLI::IsMember({"json", "text"}));
  verify->add_option("--report-file", report_file, "also write the report to this path");

  CLI11_PARSE(app, argc, argv);

  try {
    InstanceDocument doc = InstanceDocument::load(docpath);
    if (!pipeline.empty()) doc.pipeline = pipeline;
    if (hbar_override >= 0) doc.Nh = hbar_override;
    if (jet_override >= 0) doc.Dx = jet_override;
    if (doc.Dx < 2 * doc.Nh + 2)
      throw InputInvalid("truncation: jet_order must be >= 2*hbar_order + 2");

    std::string twist_json;
    CertificateReport rep = run_pipeline(doc, outpath.empty() ? nullptr : &twist_json);
    std::string rendered = report_kind == "json" ? rep.to_json() : rep.to_text();
    std::cout << rendered;
    if (!report_file.empty()) {
      std::ofstream out(report_file);
      if (!out) throw InputInvalid("cannot write report file: " + report_file);
      out << rendered;
    }
    if (!outpath.empty()) {
      if (twist_json.empty()) {
        std::cerr << "no twist produced (pipeline " << doc.pipeline << " or a failed check)\n";
      } else {
        std::ofstream out(outpath);
        if (!out) throw InputInvalid("cannot write twist file: " + outpath);
        out << twist_json;
      }
    }
    return rep.all_pass() ? 0 : 1;
  } catch (const InputInvalid& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const DytError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
