macro_rules! example {
    ($module:ident, $test:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }

        #[test]
        fn $test() {
            $module::run_example().expect("example should run");
        }
    };
}

example!(
    bias_and_spectrum,
    bias_and_spectrum_runs,
    "bias_and_spectrum.rs"
);
example!(
    derivatives_and_gowers,
    derivatives_and_gowers_runs,
    "derivatives_and_gowers.rs"
);
example!(factor_regions, factor_regions_runs, "factor_regions.rs");
example!(regularize, regularize_runs, "regularize.rs");
example!(
    rank_certificate,
    rank_certificate_runs,
    "rank_certificate.rs"
);
example!(avg_to_worst, avg_to_worst_runs, "avg_to_worst.rs");
example!(dixon, dixon_runs, "dixon.rs");
example!(tester, tester_runs, "tester.rs");
