#include "woundbench/cli.hpp"

#include "woundbench/alignment.hpp"
#include "woundbench/error.hpp"
#include "woundbench/json_format.hpp"
#include "woundbench/mesh_io.hpp"
#include "woundbench/metrics.hpp"
#include "woundbench/projection.hpp"
#include "woundbench/synthfix.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>

namespace woundbench {

namespace fs = std::filesystem;
using nlohmann::json;

std::string file_sha256(const std::string& path) {
  const std::string bytes = read_file(path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw numerical_error("sha256 failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

namespace {

json input_entry(const std::string& path) {
  return {{"path", path}, {"sha256", file_sha256(path)}};
}

// Records degenerate faces dropped on load; a nonzero count also warns on err.
json mesh_entry(const std::string& path, const TriangleMesh& mesh, std::ostream& err) {
  json entry = input_entry(path);
  entry["dropped_faces"] = mesh.dropped_faces();
  if (mesh.dropped_faces() > 0) {
    err << "warning: dropped " << mesh.dropped_faces() << " degenerate faces from " << path << "\n";
  }
  return entry;
}

json dir_entry(const std::string& dir, const std::vector<fs::path>& files) {
  json digests = json::object();
  for (const fs::path& f : files) {
    digests[f.filename().string()] = file_sha256(f.string());
  }
  return {{"path", dir}, {"files", digests}};
}

Vec3 parse_vec3(const std::string& text, const std::string& flag) {
  std::istringstream ss(text);
  Vec3 out;
  std::string part;
  int k = 0;
  while (std::getline(ss, part, ',')) {
    if (k >= 3) {
      throw input_error(flag + " expects x,y,z");
    }
    try {
      std::size_t used = 0;
      out[k] = std::stod(part, &used);
      if (used != part.size()) {
        throw input_error(flag + " expects x,y,z");
      }
    } catch (const std::logic_error&) {
      throw input_error(flag + " expects x,y,z");
    }
    ++k;
  }
  if (k != 3) {
    throw input_error(flag + " expects x,y,z");
  }
  return out;
}

json vec_json(const Vec3& v) {
  return json::array({v.x(), v.y(), v.z()});
}

json transform_json(const SimilarityTransform& t) {
  json r = json::array();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      r.push_back(t.rotation()(i, j));
    }
  }
  return {{"scale", t.scale()}, {"rotation", r}, {"translation", vec_json(t.translation())}};
}

json icp_json(const IcpParams& p) {
  return {
      {"max_iterations", p.max_iterations},
      {"convergence_tol", p.convergence_tol},
      {"rejection_multiplier", p.rejection_multiplier},
      {"sample_count", p.sample_count},
      {"seed", p.seed},
      {"max_correspondence_distance",
       std::isfinite(p.max_correspondence_distance) ? json(p.max_correspondence_distance) : json(nullptr)},
      {"reject_boundary", p.reject_boundary},
  };
}

json diagnostics_json(const AlignedPair& pair) {
  const IcpDiagnostics& d = pair.diagnostics;
  return {
      {"coarse", transform_json(pair.coarse)},
      {"fine", transform_json(pair.fine)},
      {"total", transform_json(pair.total())},
      {"camera_pairs", pair.camera_pairs},
      {"delta", pair.delta},
      {"icp_iterations", d.iterations},
      {"icp_initial_rms", d.initial_rms},
      {"icp_final_rms", d.final_rms},
      {"icp_correspondences", d.correspondences},
      {"icp_converged", d.converged},
      {"gt_wound_faces", pair.gt_wound.face_count()},
      {"est_wound_faces", pair.est_wound.face_count()},
  };
}

std::vector<fs::path> list_masks(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw input_error("not a directory: " + dir);
  }
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void emit_report(const json& report, const std::string& path, std::ostream& out) {
  const std::string text = format_json(report);
  if (path.empty()) {
    out << text;
  } else {
    write_file_atomic(path, text);
  }
}

std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void append_csv(const std::string& path, const std::string& header, const std::string& row) {
  if (path.empty()) {
    return;
  }
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream os(path, std::ios::app);
  if (!os) {
    throw input_error("cannot open " + path);
  }
  if (fresh) {
    os << header << "\n";
  }
  os << row << "\n";
}

json base_report(const std::string& command) {
  return {{"tool", "woundbench"}, {"tool_version", kToolVersion}, {"command", command}};
}

struct CommonFlags {
  std::uint64_t seed = 0;
  std::size_t samples = kDefaultMetricSamples;
  std::string out;
  std::string report;
  std::string csv;
};

struct AlignFlags {
  std::string gt_mesh;
  std::string est_mesh;
  std::string gt_cams;
  std::string est_cams;
  double delta = 0.0;
  int icp_iters = 50;
  std::size_t icp_samples = 20000;
  double rejection = 3.0;
};

void add_align_flags(CLI::App* cmd, AlignFlags& f) {
  cmd->add_option("--gt-mesh", f.gt_mesh, "Labeled ground-truth mesh (PLY)")->required();
  cmd->add_option("--est-mesh", f.est_mesh, "Estimated mesh (PLY or OBJ)")->required();
  cmd->add_option("--gt-cams", f.gt_cams, "Ground-truth camera rig JSON")->required();
  cmd->add_option("--est-cams", f.est_cams, "Estimated camera rig JSON")->required();
  cmd->add_option("--delta", f.delta, "Crop distance in mm (0 = 2 x mean GT wound edge)");
  cmd->add_option("--icp-iters", f.icp_iters, "Maximum ICP iterations");
  cmd->add_option("--icp-samples", f.icp_samples, "ICP surface samples");
  cmd->add_option("--icp-rejection", f.rejection, "Reject correspondences beyond this multiple of the median");
}

void add_common_flags(CLI::App* cmd, CommonFlags& c, bool samples, bool csv) {
  cmd->add_option("--seed", c.seed, "Random seed");
  if (samples) {
    cmd->add_option("--samples", c.samples, "Surface samples per mesh");
  }
  cmd->add_option("--report", c.report, "Write the JSON report here (default: stdout)");
  if (csv) {
    cmd->add_option("--csv", c.csv, "Append one summary row to this CSV file");
  }
}

struct AlignRun {
  AlignedPair pair;
  IcpParams icp;
  json inputs;
};

AlignRun run_alignment(const AlignFlags& f, std::uint64_t seed, std::ostream& err) {
  AlignRun run;
  run.icp.max_iterations = f.icp_iters;
  run.icp.sample_count = f.icp_samples;
  run.icp.rejection_multiplier = f.rejection;
  run.icp.seed = seed;
  const TriangleMesh gt = load_mesh(f.gt_mesh);
  const TriangleMesh est = load_mesh(f.est_mesh);
  const auto gt_cams = load_cameras(f.gt_cams);
  const auto est_cams = load_cameras(f.est_cams);
  run.inputs = {
      {"gt_mesh", mesh_entry(f.gt_mesh, gt, err)},
      {"est_mesh", mesh_entry(f.est_mesh, est, err)},
      {"gt_cams", input_entry(f.gt_cams)},
      {"est_cams", input_entry(f.est_cams)},
  };
  run.pair = align_pipeline(gt, est, gt_cams, est_cams, run.icp, f.delta);
  return run;
}

void write_aligned_outputs(const AlignRun& run, const std::string& dir) {
  fs::create_directories(dir);
  save_mesh(run.pair.est_aligned, fs::path(dir) / "est_aligned.ply");
  save_mesh(run.pair.gt_wound, fs::path(dir) / "gt_wound.ply");
  save_mesh(run.pair.est_wound, fs::path(dir) / "est_wound.ply");
  const json transforms = {
      {"coarse", transform_json(run.pair.coarse)},
      {"fine", transform_json(run.pair.fine)},
      {"total", transform_json(run.pair.total())},
  };
  write_file_atomic(fs::path(dir) / "transforms.json", format_json(transforms));
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Benchmark toolkit for 3D wound reconstruction and segmentation", "woundbench"};
  app.require_subcommand(1);

  CommonFlags common;

  // gen-fixture
  auto* gen = app.add_subcommand("gen-fixture", "Generate a synthetic wound fixture directory");
  std::string shape = "sphere";
  FixtureParams fp;
  std::string wound_center;
  double fix_scale = 1.0;
  double rot_deg = 0.0;
  std::string rot_axis = "0,0,1";
  std::string translation = "0,0,0";
  gen->add_option("--shape", shape, "sphere or cylinder");
  gen->add_option("--level", fp.level, "Tessellation level (>= 1)");
  gen->add_option("--size", fp.size, "Body radius in mm");
  gen->add_option("--wound-center", wound_center, "x,y,z (default: top of the body)");
  gen->add_option("--wound-radius", fp.wound_radius, "Wound radius R in mm");
  gen->add_option("--wound-depth", fp.wound_depth, "Maximum wound depth in mm");
  gen->add_option("--views", fp.views, "Number of ring cameras");
  gen->add_option("--resolution", fp.resolution, "Square image size in pixels");
  gen->add_option("--fov", fp.fov_deg, "Horizontal field of view in degrees");
  gen->add_option("--ring-radius", fp.ring_radius, "Camera distance from the wound in mm");
  gen->add_option("--elevation", fp.elevation_deg, "Camera elevation in degrees");
  gen->add_option("--scale", fix_scale, "Scale of the estimate frame");
  gen->add_option("--rotation-deg", rot_deg, "Rotation angle of the estimate frame");
  gen->add_option("--rotation-axis", rot_axis, "Rotation axis x,y,z");
  gen->add_option("--translation", translation, "Translation x,y,z in mm");
  gen->add_option("--sigma", fp.sigma, "Per-axis Gaussian vertex noise in mm");
  gen->add_option("--out", common.out, "Output directory")->required();
  add_common_flags(gen, common, false, false);

  // align
  auto* align = app.add_subcommand("align", "Register an estimated mesh to ground truth");
  AlignFlags align_flags;
  add_align_flags(align, align_flags);
  align->add_option("--out", common.out, "Output directory")->required();
  add_common_flags(align, common, false, false);

  // eval-3d
  auto* eval3d = app.add_subcommand("eval-3d", "Align, then compute ASD / HD90 / NC on the wound region");
  AlignFlags eval_flags;
  add_align_flags(eval3d, eval_flags);
  eval3d->add_option("--out", common.out, "Also write aligned meshes to this directory");
  add_common_flags(eval3d, common, true, true);

  // eval-2d
  auto* eval2d = app.add_subcommand("eval-2d", "Per-view IoU / Dice between mask directories");
  std::string pred_dir;
  std::string gt_dir;
  eval2d->add_option("--pred-dir", pred_dir, "Predicted PGM masks")->required();
  eval2d->add_option("--gt-dir", gt_dir, "Ground-truth PGM masks")->required();
  add_common_flags(eval2d, common, false, true);

  // project
  auto* project = app.add_subcommand("project", "Project 2D wound masks onto mesh vertices");
  std::string mesh_path;
  std::string cams_path;
  std::string masks_dir;
  ProjectionParams proj_params;
  double bias = -1.0;
  project->add_option("--mesh", mesh_path, "Mesh to label")->required();
  project->add_option("--cams", cams_path, "Camera rig JSON")->required();
  project->add_option("--masks-dir", masks_dir, "Directory with <view name>.pgm masks")->required();
  project->add_option("--theta", proj_params.theta, "Wound vote fraction threshold in (0, 1]");
  project->add_option("--bias", bias, "Visibility depth slack in mm (default 1e-3 x bbox diagonal)");
  project->add_option("--out", common.out, "Output directory")->required();
  add_common_flags(project, common, false, false);

  // eval-seg3d
  auto* seg3d = app.add_subcommand("eval-seg3d", "BAHD and vertex precision / recall of a 3D segmentation");
  std::string seg_gt;
  std::string seg_pred;
  double tau = -1.0;
  seg3d->add_option("--gt-mesh", seg_gt, "Labeled ground-truth mesh")->required();
  seg3d->add_option("--pred-mesh", seg_pred, "Labeled predicted mesh")->required();
  seg3d->add_option("--tau", tau, "Vertex match distance in mm (default: median GT wound edge)");
  seg3d->add_option("--out", common.out, "Write confusion-colored mesh to this directory");
  add_common_flags(seg3d, common, false, true);

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  if (args.empty()) {
    argv.push_back("woundbench");
  }
  for (const std::string& a : args) {
    argv.push_back(a.c_str());
  }

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return 2;
  }

  try {
    if (gen->parsed()) {
      fp.shape = parse_body_shape(shape);
      fp.seed = common.seed;
      if (!wound_center.empty()) {
        fp.wound_center = parse_vec3(wound_center, "--wound-center");
      }
      fp.transform = SimilarityTransform(
          fix_scale, axis_angle_rotation(parse_vec3(rot_axis, "--rotation-axis"), rot_deg * std::numbers::pi / 180.0),
          parse_vec3(translation, "--translation"));
      const FixtureBundle bundle = make_fixture(fp);
      write_fixture(bundle, common.out);
      json report = base_report("gen-fixture");
      report["parameters"] = json::parse(read_file(fs::path(common.out) / "fixture.json"));
      report["out"] = common.out;
      emit_report(report, common.report, out);
      return 0;
    }

    if (align->parsed() || eval3d->parsed()) {
      const bool evaluate = eval3d->parsed();
      const AlignFlags& f = evaluate ? eval_flags : align_flags;
      const AlignRun run = run_alignment(f, common.seed, err);
      if (!common.out.empty()) {
        write_aligned_outputs(run, common.out);
      }
      json report = base_report(evaluate ? "eval-3d" : "align");
      report["inputs"] = run.inputs;
      report["parameters"] = {{"icp", icp_json(run.icp)}, {"delta", f.delta}, {"seed", common.seed}};
      report["alignment"] = diagnostics_json(run.pair);
      if (evaluate) {
        const SurfaceMetrics m = surface_metrics(run.pair.gt_wound, run.pair.est_wound, common.samples, common.seed);
        report["parameters"]["samples"] = common.samples;
        report["surface_metrics"] = {
            {"asd", m.asd}, {"hd90", m.hd90}, {"nc", m.nc}, {"sample_count", m.sample_count}, {"seed", m.seed}};
        append_csv(
            common.csv, "gt_mesh,est_mesh,asd,hd90,nc,icp_final_rms",
            f.gt_mesh + "," + f.est_mesh + "," + csv_number(m.asd) + "," + csv_number(m.hd90) + "," +
                csv_number(m.nc) + "," + csv_number(run.pair.diagnostics.final_rms));
      }
      if (!common.out.empty()) {
        report["out"] = common.out;
      }
      emit_report(report, common.report, out);
      return 0;
    }

    if (eval2d->parsed()) {
      const auto gt_files = list_masks(gt_dir);
      if (gt_files.empty()) {
        throw input_error("no .pgm masks in " + gt_dir);
      }
      std::vector<fs::path> pred_files;
      json views = json::array();
      double iou_sum = 0.0;
      double dice_sum = 0.0;
      MaskOverlap pooled;
      for (const fs::path& g : gt_files) {
        const fs::path p = fs::path(pred_dir) / g.filename();
        if (!fs::exists(p)) {
          throw input_error("missing predicted mask " + p.string());
        }
        pred_files.push_back(p);
        const BinaryMask2D gm = load_mask(g);
        const BinaryMask2D pm = load_mask(p);
        const MaskOverlap o = mask_overlap(pm, gm);
        const double vi = iou(pm, gm);
        const double vd = dice(pm, gm);
        iou_sum += vi;
        dice_sum += vd;
        pooled.intersection += o.intersection;
        pooled.a += o.a;
        pooled.b += o.b;
        views.push_back(
            {{"name", g.filename().string()},
             {"iou", vi},
             {"dice", vd},
             {"intersection", o.intersection},
             {"pred_pixels", o.a},
             {"gt_pixels", o.b}});
      }
      const double n = static_cast<double>(gt_files.size());
      const std::size_t pooled_union = pooled.a + pooled.b - pooled.intersection;
      const double pooled_iou =
          pooled_union == 0 ? 1.0 : static_cast<double>(pooled.intersection) / static_cast<double>(pooled_union);
      const double pooled_dice = pooled.a + pooled.b == 0
          ? 1.0
          : 2.0 * static_cast<double>(pooled.intersection) / static_cast<double>(pooled.a + pooled.b);
      json report = base_report("eval-2d");
      report["inputs"] = {{"pred_dir", dir_entry(pred_dir, pred_files)}, {"gt_dir", dir_entry(gt_dir, gt_files)}};
      report["views"] = views;
      report["mean_iou"] = iou_sum / n;
      report["mean_dice"] = dice_sum / n;
      report["pooled_iou"] = pooled_iou;
      report["pooled_dice"] = pooled_dice;
      append_csv(
          common.csv, "pred_dir,gt_dir,views,mean_iou,mean_dice,pooled_iou,pooled_dice",
          pred_dir + "," + gt_dir + "," + std::to_string(gt_files.size()) + "," + csv_number(iou_sum / n) + "," +
              csv_number(dice_sum / n) + "," + csv_number(pooled_iou) + "," + csv_number(pooled_dice));
      emit_report(report, common.report, out);
      return 0;
    }

    if (project->parsed()) {
      const TriangleMesh mesh = load_mesh(mesh_path);
      const auto cams = load_cameras(cams_path);
      std::vector<BinaryMask2D> masks;
      std::vector<fs::path> mask_files;
      for (const CameraView& cam : cams) {
        const fs::path p = fs::path(masks_dir) / (cam.name + ".pgm");
        if (!fs::exists(p)) {
          throw input_error("missing mask for view " + cam.name + ": " + p.string());
        }
        mask_files.push_back(p);
        masks.push_back(load_mask(p));
      }
      if (bias >= 0.0) {
        proj_params.bias = bias;
      }
      const ProjectionResult result = project_masks(mesh, cams, masks, proj_params);
      fs::create_directories(common.out);
      const fs::path labeled = fs::path(common.out) / "projected_mesh.ply";
      save_mesh(result.mesh, labeled);
      json report = base_report("project");
      report["inputs"] = {
          {"mesh", mesh_entry(mesh_path, mesh, err)}, {"cams", input_entry(cams_path)}, {"masks_dir", dir_entry(masks_dir, mask_files)}};
      report["parameters"] = {{"theta", proj_params.theta}, {"bias", result.bias}, {"seed", common.seed}};
      report["wound_vertices"] = result.mesh.wound_vertex_count();
      report["unobserved"] = result.unobserved;
      report["vertices"] = result.mesh.vertex_count();
      report["out"] = labeled.string();
      emit_report(report, common.report, out);
      return 0;
    }

    if (seg3d->parsed()) {
      const TriangleMesh gt = load_mesh(seg_gt);
      const TriangleMesh pred = load_mesh(seg_pred);
      if (!gt.has_labels() || !pred.has_labels()) {
        throw input_error("both meshes need a per-vertex label property");
      }
      const double used_tau = tau >= 0.0 ? tau : default_match_tau(gt);
      const SegmentationCounts counts = vertex_precision_recall(gt, pred, used_tau);
      const auto g = wound_points(gt);
      const auto s = wound_points(pred);
      const double bahd_value = s.empty() ? std::numeric_limits<double>::infinity() : bahd(g, s);
      json report = base_report("eval-seg3d");
      report["inputs"] = {{"gt_mesh", mesh_entry(seg_gt, gt, err)}, {"pred_mesh", mesh_entry(seg_pred, pred, err)}};
      report["parameters"] = {{"tau", used_tau}, {"seed", common.seed}};
      report["segmentation"] = {
          {"bahd", bahd_value},
          {"tp", counts.tp},
          {"fp", counts.fp},
          {"fn", counts.fn},
          {"precision", counts.precision},
          {"recall", counts.recall}};
      if (!common.out.empty()) {
        fs::create_directories(common.out);
        const fs::path colored = fs::path(common.out) / "confusion.ply";
        save_mesh(confusion_colored_mesh(gt, pred, used_tau), colored);
        report["out"] = colored.string();
      }
      append_csv(
          common.csv, "gt_mesh,pred_mesh,tau,bahd,precision,recall",
          seg_gt + "," + seg_pred + "," + csv_number(used_tau) + "," + csv_number(bahd_value) + "," +
              csv_number(counts.precision) + "," + csv_number(counts.recall));
      emit_report(report, common.report, out);
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::input ? 2 : 3;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  err << app.help();
  return 2;
}

} // namespace woundbench
