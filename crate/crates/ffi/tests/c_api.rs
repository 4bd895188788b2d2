use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use cbreason_ffi::*;

fn last_error() -> String {
    let p = cbr_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn square(h: usize, w: usize, top: usize, left: usize, side: usize) -> Vec<u8> {
    let mut m = vec![0u8; h * w];
    for r in top..top + side {
        for c in left..left + side {
            m[r * w + c] = 255;
        }
    }
    m
}

#[test]
fn distance_transform_and_fields() {
    let mask = square(5, 5, 1, 1, 3);
    let mut d = vec![0f32; 25];
    assert_eq!(
        unsafe { cbr_distance_transform(mask.as_ptr(), 5, 5, d.as_mut_ptr()) },
        CbrStatus::Ok
    );
    assert_eq!(d[12], 2.0);
    assert_eq!(d[6], 1.0);
    assert_eq!(d[0], 0.0);

    let mut b = vec![0f32; 25];
    assert_eq!(
        unsafe { cbr_boundary_field(mask.as_ptr(), 5, 5, b.as_mut_ptr()) },
        CbrStatus::Ok
    );
    assert_eq!(b[12], 1.0);
    assert_eq!(b.iter().cloned().fold(f32::INFINITY, f32::min), -1.0);

    let mut c = vec![0f32; 50];
    assert_eq!(
        unsafe { cbr_center_field(mask.as_ptr(), 5, 5, c.as_mut_ptr()) },
        CbrStatus::Ok
    );
    // pixel (1,2) sits straight above the center: (-1, 0)
    assert_eq!(&c[2 * 7..2 * 7 + 2], &[-1.0, 0.0]);
    assert_eq!(&c[2 * 12..2 * 12 + 2], &[0.0, 0.0]);
}

#[test]
fn recovery_on_a_ramp() {
    let field: Vec<f32> = (0..9 * 9).map(|i| (i % 9) as f32 / 50.0).collect();
    let mut out = 0.0;
    let s = unsafe { cbr_recover_max_distance(field.as_ptr(), 9, 9, 4, 4, &mut out) };
    assert_eq!(s, CbrStatus::Ok);
    assert!((out - 50.0).abs() < 1e-3, "{out}");
    let s = unsafe { cbr_recover_max_distance(field.as_ptr(), 9, 9, 0, 4, &mut out) };
    assert_eq!(s, CbrStatus::InvalidArgument);
}

#[test]
fn errors_set_status_and_message() {
    let empty = [0u8; 16];
    let mut out = vec![0f32; 16];
    let s = unsafe { cbr_boundary_field(empty.as_ptr(), 4, 4, out.as_mut_ptr()) };
    assert_eq!(s, CbrStatus::EmptyMask);
    assert!(last_error().contains("foreground"));

    let s = unsafe { cbr_boundary_field(ptr::null(), 4, 4, out.as_mut_ptr()) };
    assert_eq!(s, CbrStatus::NullPointer);
    assert!(last_error().contains("mask"));

    let bad = CString::new("tau_e = 7.0").unwrap();
    let mut cfg = ptr::null_mut();
    let s = unsafe { cbr_config_from_toml(bad.as_ptr(), &mut cfg) };
    assert_eq!(s, CbrStatus::InvalidArgument);
    assert!(cfg.is_null());

    let missing = CString::new("/nonexistent/scene.json").unwrap();
    let mut scene = ptr::null_mut();
    assert_eq!(
        unsafe { cbr_scene_load(missing.as_ptr(), &mut scene) },
        CbrStatus::Io
    );

    // free functions accept null
    unsafe {
        cbr_scene_free(ptr::null_mut());
        cbr_config_free(ptr::null_mut());
        cbr_discovery_free(ptr::null_mut());
    }
    assert_eq!(unsafe { cbr_discovery_count(ptr::null()) }, 0);
    assert!(!unsafe { CStr::from_ptr(cbr_version()) }
        .to_bytes()
        .is_empty());
}

#[test]
fn discovery_round_trip() {
    let (h, w) = (96, 96);
    let id = CString::new("two").unwrap();
    let scene = unsafe { cbr_scene_new(id.as_ptr(), h, w) };
    assert!(!scene.is_null());
    for (top, left) in [(10, 10), (50, 56)] {
        let m = square(h, w, top, left, 28);
        assert_eq!(
            unsafe { cbr_scene_add_instance(scene, m.as_ptr()) },
            CbrStatus::Ok
        );
    }
    assert_eq!(unsafe { cbr_scene_instance_count(scene) }, 2);
    let empty = vec![0u8; h * w];
    assert_eq!(
        unsafe { cbr_scene_add_instance(scene, empty.as_ptr()) },
        CbrStatus::InvalidArgument
    );

    let cfg = cbr_config_default();
    assert_eq!(unsafe { cbr_config_set_seed(cfg, 3) }, CbrStatus::Ok);
    let mut d = ptr::null_mut();
    assert_eq!(
        unsafe { cbr_discover(scene, cfg, 1, &mut d) },
        CbrStatus::Ok
    );
    assert_eq!(unsafe { cbr_discovery_count(d) }, 2);

    let mut boxes = Vec::new();
    for i in 0..2 {
        let mut det = CbrDetection::default();
        assert_eq!(unsafe { cbr_discovery_get(d, i, &mut det) }, CbrStatus::Ok);
        assert_eq!(det.area, 28 * 28);
        assert!(det.confidence > 0.9 && det.confidence <= 1.0, "{det:?}");
        let mut mask = vec![0u8; h * w];
        assert_eq!(
            unsafe { cbr_discovery_mask(d, i, mask.as_mut_ptr(), h * w) },
            CbrStatus::Ok
        );
        assert_eq!(mask.iter().filter(|&&v| v == 1).count(), det.area);
        boxes.push((det.u1, det.v1, det.u2, det.v2));
    }
    boxes.sort();
    assert_eq!(boxes, vec![(10, 10, 37, 37), (50, 56, 77, 83)]);

    let mut det = CbrDetection::default();
    assert_eq!(
        unsafe { cbr_discovery_get(d, 2, &mut det) },
        CbrStatus::OutOfRange
    );
    let mut small = vec![0u8; 4];
    assert_eq!(
        unsafe { cbr_discovery_mask(d, 0, small.as_mut_ptr(), 4) },
        CbrStatus::InvalidArgument
    );

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dets.json");
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    assert_eq!(
        unsafe { cbr_discovery_write_json(d, cpath.as_ptr()) },
        CbrStatus::Ok
    );
    let records = cbreason::io::read_detections(&path).unwrap();
    assert_eq!(records.len(), 2);
    assert!(records.iter().all(|r| r.scene_id == "two"));

    unsafe {
        cbr_discovery_free(d);
        cbr_config_free(cfg);
        cbr_scene_free(scene);
    }
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("cbreason.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "cbr_discover",
        "cbr_last_error",
        "CBR_STATUS_OK",
        "typedef struct CbrScene CbrScene",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; syntax check skipped");
        return;
    };
    assert!(cc.status.success());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"cbreason.h\"\n\
         int main(void) {\n\
           CbrScene *s = cbr_scene_new(\"x\", 8, 8);\n\
           CbrDiscovery *d = 0;\n\
           CbrStatus st = cbr_discover(s, 0, 1, &d);\n\
           cbr_discovery_free(d);\n\
           cbr_scene_free(s);\n\
           return st == CBR_STATUS_OK ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
