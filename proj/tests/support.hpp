#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <losfis/losfis.hpp>

#ifndef LOSFIS_DATA_DIR
#error "LOSFIS_DATA_DIR must point at the shipped configuration files"
#endif

namespace support {

  inline std::string data_path(std::string const& name) { return std::string{LOSFIS_DATA_DIR} + "/" + name; }

  inline std::string slurp(std::string const& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
  }

  inline losfis::SugenoFis load_fis(std::string const& name = "legerova.fis") {
    auto r = losfis::dsl::parse(slurp(data_path(name)));
    if (!r) throw std::runtime_error(name + ": " + r.errors.front().to_string());
    return *r.fis;
  }

  inline losfis::LosRegionModel load_regions(std::string const& name = "legerova.los") {
    auto r = losfis::parse_regions(slurp(data_path(name)));
    if (!r) throw std::runtime_error(name + ": " + r.errors.front().to_string());
    return *r.model;
  }

  inline losfis::InferenceResult infer_at(losfis::SugenoFis const& fis, double flow, double speed) {
    double const in[2] = {flow, speed};
    return fis.infer(in);
  }

}  // namespace support
