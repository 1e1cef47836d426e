use proptest::prelude::*;
use stitchkit_core::augment::{gaussian_blur, gaussian_kernel};
use stitchkit_core::imgcore::{decode_image, decode_mask, encode_pgm, encode_png};
use stitchkit_core::{load_image, load_mask, resize_bilinear, save_image, save_mask, BinaryMask, GrayImage};

/// Scalar half-pixel bilinear reference evaluated per output pixel.
fn reference_bilinear(src: &[u8], in_w: usize, out_w: usize) -> Vec<u8> {
    (0..out_w)
        .map(|x| {
            let pos = ((x as f64 + 0.5) * in_w as f64 / out_w as f64 - 0.5).max(0.0).min((in_w - 1) as f64);
            let left = pos.floor() as usize;
            let right = (left + 1).min(in_w - 1);
            let frac = pos - left as f64;
            let v = src[left] as f64 + frac * (src[right] as f64 - src[left] as f64);
            v.round() as u8
        })
        .collect()
}

#[test]
fn upsample_row_matches_scalar_reference() {
    let img = GrayImage::new(2, 1, vec![0, 255]).unwrap();
    let out = resize_bilinear(&img, 4, 1).unwrap();
    let expect = reference_bilinear(&[0, 255], 2, 4);
    assert_eq!(out.pixels(), expect.as_slice());
    assert_eq!(expect, vec![0, 64, 191, 255]);
}

#[test]
fn longer_row_matches_scalar_reference() {
    let src: Vec<u8> = vec![3, 250, 17, 90, 128, 0, 255];
    let img = GrayImage::new(src.len() as u32, 1, src.clone()).unwrap();
    for out_w in [1usize, 3, 5, 11, 20] {
        let out = resize_bilinear(&img, out_w as u32, 1).unwrap();
        assert_eq!(out.pixels(), reference_bilinear(&src, src.len(), out_w).as_slice(), "out_w {out_w}");
    }
}

#[test]
fn blur_of_single_pixel_matches_discrete_gaussian() {
    let mut img = GrayImage::filled(21, 21, 0).unwrap();
    img.set(10, 10, 255);
    let out = gaussian_blur(&img, 1.0);
    let weights: Vec<f64> = (-3i32..=3).map(|k| (-(k * k) as f64 / 2.0).exp()).collect();
    let center = 1.0 / weights.iter().sum::<f64>();
    assert!((gaussian_kernel(1.0)[3] - center).abs() < 1e-15);
    assert_eq!(out.get(10, 10), (255.0 * center * center).round() as u8);
    assert_eq!(out.get(10, 10), 41);
}

#[test]
fn files_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let img = GrayImage::from_fn(31, 17, |x, y| (x * 8 + y) as u8).unwrap();
    for name in ["a.png", "a.pgm"] {
        let path = dir.path().join(name);
        save_image(&img, &path).unwrap();
        assert_eq!(load_image(&path).unwrap(), img);
    }
    let mask = BinaryMask::from_fn(31, 17, |x, y| (x + y) % 3 == 0).unwrap();
    let path = dir.path().join("m.png");
    save_mask(&mask, &path).unwrap();
    assert_eq!(load_mask(&path).unwrap(), mask);
    assert_eq!(load_image(&path).unwrap().min_max(), (0, 255));
    assert!(matches!(load_image(dir.path().join("missing.png")), Err(stitchkit_core::Error::Io(_))));
}

fn arb_image() -> impl Strategy<Value = GrayImage> {
    (1u32..40, 1u32..40).prop_flat_map(|(w, h)| {
        proptest::collection::vec(any::<u8>(), (w * h) as usize).prop_map(move |px| GrayImage::new(w, h, px).unwrap())
    })
}

proptest! {
    #[test]
    fn encode_decode_is_identity(img in arb_image()) {
        prop_assert_eq!(&decode_image(&encode_png(&img).unwrap()).unwrap(), &img);
        prop_assert_eq!(&decode_image(&encode_pgm(&img)).unwrap(), &img);
        let mask = BinaryMask::from_gray(&img);
        prop_assert_eq!(decode_mask(&encode_png(&mask.to_gray()).unwrap()).unwrap(), mask);
    }
}
