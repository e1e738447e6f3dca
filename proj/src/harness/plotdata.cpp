#include "relnav/harness/plotdata.hpp"

#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace relnav::harness {

PlotPanel panel_from_name(const std::string& name) {
  if (name == "velocity") return PlotPanel::Velocity;
  if (name == "heading") return PlotPanel::Heading;
  if (name == "topdown") return PlotPanel::TopDown;
  if (name == "trace") return PlotPanel::Trace;
  if (name == "clearance") return PlotPanel::Clearance;
  throw std::invalid_argument("unknown plot panel: " + name);
}

void emit_plot_data(const MissionLog& log, PlotPanel panel,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open plot file: " + path);
  out << std::setprecision(17);

  switch (panel) {
    case PlotPanel::Velocity:
      out << "t,v_commanded,v_true,v_est\n";
      for (const auto& r : log.records) {
        out << r.t << "," << std::hypot(r.ref_v0.x(), r.ref_v0.y()) << ","
            << std::hypot(r.v_true.x(), r.v_true.y()) << ","
            << std::hypot(r.v_est.x(), r.v_est.y()) << "\n";
      }
      break;
    case PlotPanel::Heading:
      out << "t,psi_ref_deg,yaw_true_deg,yaw_est_deg,err_deg\n";
      for (const auto& r : log.records) {
        const double deg = 180.0 / M_PI;
        out << r.t << "," << r.psi_ref * deg << ","
            << quaternion_to_yaw(r.q_true) * deg << ","
            << quaternion_to_yaw(r.q_est) * deg << ","
            << quaternion_error_yaw(r.q_true, r.ref_q0) * deg << "\n";
      }
      break;
    case PlotPanel::TopDown:
      out << "x_true,y_true,x_est,y_est,x_target,y_target\n";
      for (const auto& r : log.records) {
        out << r.p_true.x() << "," << r.p_true.y() << "," << r.p_est.x() << ","
            << r.p_est.y() << "," << r.target_true.x() << ","
            << r.target_true.y() << "\n";
      }
      break;
    case PlotPanel::Trace:
      out << "t,trace,tau_up,tau_down,mode\n";
      for (const auto& r : log.records) {
        out << r.t << "," << r.trace << "," << log.header.tau_up << ","
            << log.header.tau_down << ","
            << (r.mode == mission::Mode::Track ? 1 : 0) << "\n";
      }
      break;
    case PlotPanel::Clearance:
      out << "t,min_clearance,min_h,r_safe\n";
      for (const auto& r : log.records) {
        out << r.t << "," << r.min_clearance_true << "," << r.min_h << ","
            << log.header.r_safe << "\n";
      }
      break;
  }
}

}  // namespace relnav::harness
