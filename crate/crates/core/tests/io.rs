use radarkit::io::{read_points, read_rtf, write_points, write_rtf, RtfArray};
use radarkit::signal::{aggregate, rad_from_frame, synthesize_frame, Aggregation, ChirpConfig, Reflector};
use radarkit::{FusedPoint, LidarPoint, Provenance, RadarPoint, ViewKind};

fn tensor() -> radarkit::RadTensor {
    let cfg = ChirpConfig {
        fc: 77e9,
        bandwidth: 1e9,
        sweep: 50e-6,
        frame_time: 0.02,
        n_chirps: 12,
        n_samples: 10,
        n_tx: 1,
        n_rx: 3,
        rx_spacing: 0.002,
    };
    let r = Reflector { range: 0.7, radial_velocity: 0.05, azimuth: 12.0, amplitude: 2.0 };
    rad_from_frame(&synthesize_frame(&cfg, &[r]).unwrap()).unwrap()
}

#[test]
fn tensors_and_views_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let t = tensor();
    write_rtf(&dir.path().join("t"), &RtfArray::from(&t)).unwrap();
    assert_eq!(read_rtf(&dir.path().join("t.json")).unwrap().into_rad_tensor().unwrap(), t);

    let v = aggregate(&t, ViewKind::AD, Aggregation::MaxLog).unwrap();
    write_rtf(&dir.path().join("v"), &RtfArray::from(&v)).unwrap();
    assert_eq!(read_rtf(&dir.path().join("v")).unwrap().into_view().unwrap(), v);
}

#[test]
fn truncated_payload_is_a_format_error() {
    let dir = tempfile::tempdir().unwrap();
    write_rtf(&dir.path().join("t"), &RtfArray::from(&tensor())).unwrap();
    let bin = dir.path().join("t.bin");
    let bytes = std::fs::read(&bin).unwrap();
    std::fs::write(&bin, &bytes[..bytes.len() - 3]).unwrap();
    let err = read_rtf(&dir.path().join("t")).unwrap_err().to_string();
    assert!(err.contains("t.bin") || err.contains("payload"), "{err}");
}

#[test]
fn point_clouds_round_trip_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let radar = vec![RadarPoint { x: 0.1, y: 1.0 / 3.0, vx: -2.5e-7, vy: 4.0, rcs: -11.25 }];
    let lidar = vec![LidarPoint { x: 1e-300, y: 7.0, intensity: 0.0 }, LidarPoint { x: -3.3, y: 2.2, intensity: 9.5 }];
    let fused = vec![FusedPoint { x: 1.5, y: 2.0, intensity: 3.0, vx: 0.0, vy: 0.25, rcs: -1.0, provenance: Provenance::LidarEnriched }];
    let p = dir.path();
    write_points(&p.join("r.csv"), &radar).unwrap();
    write_points(&p.join("l.csv"), &lidar).unwrap();
    write_points(&p.join("f.csv"), &fused).unwrap();
    assert_eq!(read_points::<RadarPoint>(&p.join("r.csv")).unwrap(), radar);
    assert_eq!(read_points::<LidarPoint>(&p.join("l.csv")).unwrap(), lidar);
    assert_eq!(read_points::<FusedPoint>(&p.join("f.csv")).unwrap(), fused);
}

#[test]
fn missing_file_error_names_it() {
    let err = read_points::<LidarPoint>(std::path::Path::new("/no/such/cloud.csv")).unwrap_err().to_string();
    assert!(err.contains("/no/such/cloud.csv"), "{err}");
}
