use std::path::{Path, PathBuf};

use mdt_core::formats::{
    to_json, CorrectionDocument, CorrespondenceSet, MdtDocument, TransformSet, FORMAT_VERSION,
};
use mdt_core::image_io::{read_png, write_png};
use mdt_core::panorama::{
    chain_transforms, composite, composite_transforms, rereference, CorrectionResult,
    DistortionReport, PanoramaImage, PanoramaInput,
};
use mdt_core::{
    distortion_breakdown_2d, fisher_distortion, mdt, KarcherConfig, MdtResult, SquareMatrix,
};
use serde::Serialize;

use crate::{CliError, Reference, Verbosity};

type CliResult<T = ()> = Result<T, CliError>;

/// Writes `text` to `path`, or to standard output when no path is given.
fn emit(path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Format(e.into())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// The table goes to standard output only when the document does not.
fn show_table(output: Option<&Path>, verbosity: Verbosity) -> bool {
    output.is_some() && verbosity != Verbosity::Quiet
}

fn solver_diagnostics(result: &MdtResult, verbosity: Verbosity) {
    if verbosity == Verbosity::Verbose {
        eprintln!(
            "karcher mean: {} iterations, gradient norm {:.3e}, objective {:.12}",
            result.solver.iterations, result.solver.final_gradient_norm, result.solver.objective
        );
    }
}

fn format_row(cells: &[String], widths: &[usize]) -> String {
    cells
        .iter()
        .zip(widths)
        .enumerate()
        .map(|(i, (c, w))| {
            if i == 0 {
                format!("{c:<w$}")
            } else {
                format!("{c:>w$}")
            }
        })
        .collect::<Vec<_>>()
        .join("  ")
}

fn print_table(header: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let header: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    println!("{}", format_row(&header, &widths));
    println!(
        "{}",
        widths
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .join("  ")
    );
    for row in rows {
        println!("{}", format_row(row, &widths));
    }
}

fn number(x: f64) -> String {
    format!("{x:.6}")
}

fn print_matrix(label: &str, m: &SquareMatrix) {
    println!("{label}:");
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:>14.8}")).collect();
        println!("  [{}]", cells.join(" "));
    }
}

pub fn run_mdt(
    input: &Path,
    output: Option<&Path>,
    config: &KarcherConfig,
    verbosity: Verbosity,
) -> CliResult {
    let set = TransformSet::read(input)?;
    let ids = set.ids();
    let result = mdt(&set.linear_parts(), config)?;
    solver_diagnostics(&result, verbosity);
    emit(
        output,
        &to_json(&MdtDocument::new(&result, ids.iter().copied())),
    )?;

    if show_table(output, verbosity) {
        print_matrix("T", result.transform.matrix());
        println!("objective (mdt reference): {}", number(result.objective));
        let rows: Vec<Vec<String>> = ids
            .iter()
            .zip(&result.baseline_objectives)
            .map(|(id, b)| vec![id.to_string(), number(*b)])
            .collect();
        print_table(&["reference", "objective"], &rows);
    }
    Ok(())
}

/// Distortion of one transform relative to the chosen reference. The
/// angular and areal parts are only defined in the plane.
#[derive(Debug, Serialize)]
struct TransformDistortion {
    id: String,
    total: f64,
    angular: Option<f64>,
    areal: Option<f64>,
}

#[derive(Debug, Serialize)]
struct ReportDocument {
    version: u32,
    dim: usize,
    reference: String,
    reference_transform: Vec<Vec<f64>>,
    per_transform: Vec<TransformDistortion>,
    /// `Σ Dist_F²` over all transforms.
    total: f64,
}

fn reference_label(reference: Reference) -> String {
    match reference {
        Reference::Mdt => "mdt".into(),
        Reference::Identity => "identity".into(),
        Reference::Index(j) => format!("index:{j}"),
    }
}

pub fn run_report(
    input: &Path,
    output: Option<&Path>,
    reference: Reference,
    config: &KarcherConfig,
    verbosity: Verbosity,
) -> CliResult {
    let set = TransformSet::read(input)?;
    let linear = set.linear_parts();
    let dim = set.dim;
    let reference_matrix = match reference {
        Reference::Identity => SquareMatrix::identity(dim),
        Reference::Index(j) => linear.get(j).cloned().ok_or(CliError::BadIndex {
            index: j,
            count: linear.len(),
        })?,
        Reference::Mdt => {
            let result = mdt(&linear, config)?;
            solver_diagnostics(&result, verbosity);
            result.transform.into_matrix()
        }
    };
    let inverse = reference_matrix.inverse()?;

    let mut per_transform = Vec::with_capacity(linear.len());
    let mut total = 0.0;
    for (id, a) in set.ids().into_iter().zip(&linear) {
        let relative = inverse.matmul(a);
        let entry = if dim == 2 {
            let b = distortion_breakdown_2d(&relative)?;
            TransformDistortion {
                id: id.into(),
                total: b.total,
                angular: Some(b.angular),
                areal: Some(b.areal),
            }
        } else {
            let d = fisher_distortion(&relative)?;
            TransformDistortion {
                id: id.into(),
                total: d,
                angular: None,
                areal: None,
            }
        };
        total += entry.total * entry.total;
        per_transform.push(entry);
    }
    let doc = ReportDocument {
        version: FORMAT_VERSION,
        dim,
        reference: reference_label(reference),
        reference_transform: reference_matrix.rows(),
        per_transform,
        total,
    };
    emit(output, &to_json(&doc))?;

    if show_table(output, verbosity) {
        println!("reference: {}", doc.reference);
        let optional = |x: Option<f64>| x.map_or_else(|| "-".into(), number);
        let rows: Vec<Vec<String>> = doc
            .per_transform
            .iter()
            .map(|t| {
                vec![
                    t.id.clone(),
                    number(t.total),
                    optional(t.angular),
                    optional(t.areal),
                ]
            })
            .collect();
        print_table(&["id", "distortion", "angular", "areal"], &rows);
        println!("total squared distortion: {}", number(doc.total));
    }
    Ok(())
}

fn image_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.png"))
}

/// Panorama images with sizes taken from `<dir>/<id>.png` when present and
/// from the entry's `width`/`height` otherwise. Pixels are loaded only when
/// `with_pixels` is set, in which case every PNG must exist.
fn load_images(
    set: &TransformSet,
    dir: Option<&Path>,
    with_pixels: bool,
) -> CliResult<Vec<PanoramaImage>> {
    set.ids()
        .into_iter()
        .zip(set.sizes())
        .map(|(id, size)| {
            let path = dir.map(|d| image_path(d, id));
            match path {
                Some(p) if with_pixels || p.is_file() => {
                    let pixels = read_png(&p)?;
                    Ok(if with_pixels {
                        PanoramaImage::with_pixels(id, pixels)
                    } else {
                        PanoramaImage::new(id, pixels.width, pixels.height)
                    })
                }
                _ => size
                    .map(|(w, h)| PanoramaImage::new(id, w, h))
                    .ok_or_else(|| {
                        CliError::Input(format!(
                            "no size for '{id}': add width/height to the entry or pass --images"
                        ))
                    }),
            }
        })
        .collect()
}

fn image_sizes(images: &[PanoramaImage]) -> Vec<Option<(u32, u32)>> {
    images.iter().map(|i| Some((i.width, i.height))).collect()
}

fn print_report(report: &DistortionReport) {
    let rows: Vec<Vec<String>> = report
        .per_image
        .iter()
        .map(|d| {
            vec![
                d.id.clone(),
                number(d.before.total),
                number(d.after.total),
                number(d.after.angular),
                number(d.after.areal),
            ]
        })
        .collect();
    print_table(&["id", "before", "after", "angular", "areal"], &rows);
    println!(
        "total squared distortion: {} with fixed reference '{}', {} after re-referencing",
        number(report.total_before_best_fixed),
        report.chosen_fixed_baseline,
        number(report.total_after)
    );
}

fn correct(
    set: &TransformSet,
    images: Vec<PanoramaImage>,
    config: &KarcherConfig,
    verbosity: Verbosity,
) -> CliResult<(PanoramaInput, CorrectionResult)> {
    let input = PanoramaInput::new(images, set.affine_transforms()?)?;
    let result = rereference(&input, config)?;
    solver_diagnostics(&result.mdt, verbosity);
    Ok((input, result))
}

pub fn run_rereference(
    input: &Path,
    output: Option<&Path>,
    images: Option<&Path>,
    config: &KarcherConfig,
    verbosity: Verbosity,
) -> CliResult {
    let set = TransformSet::read(input)?;
    let (panorama, result) = correct(&set, load_images(&set, images, false)?, config, verbosity)?;
    let doc = CorrectionDocument::new(&result, set.ids(), &image_sizes(panorama.images()));
    emit(output, &to_json(&doc))?;
    if show_table(output, verbosity) {
        print_report(&result.report);
    }
    Ok(())
}

pub fn run_compose(
    input: &Path,
    output: &Path,
    images: &Path,
    transforms_output: Option<&Path>,
    raw: bool,
    config: &KarcherConfig,
    verbosity: Verbosity,
) -> CliResult {
    let set = TransformSet::read(input)?;
    let loaded = load_images(&set, Some(images), true)?;
    let canvas = if raw {
        let panorama = PanoramaInput::new(loaded, set.affine_transforms()?)?;
        composite_transforms(&panorama, panorama.transforms())?
    } else {
        let (panorama, result) = correct(&set, loaded, config, verbosity)?;
        if let Some(path) = transforms_output {
            let doc = CorrectionDocument::new(&result, set.ids(), &image_sizes(panorama.images()));
            emit(Some(path), &to_json(&doc))?;
        }
        if verbosity != Verbosity::Quiet {
            print_report(&result.report);
        }
        composite(&panorama, &result)?
    };
    write_png(output, &canvas.image)?;
    if verbosity != Verbosity::Quiet {
        println!(
            "wrote {}x{} canvas (origin {}, {}) to {}",
            canvas.image.width,
            canvas.image.height,
            canvas.origin[0],
            canvas.origin[1],
            output.display()
        );
    }
    Ok(())
}

pub fn run_estimate(
    input: &Path,
    output: Option<&Path>,
    images: Option<&Path>,
    verbosity: Verbosity,
) -> CliResult {
    let correspondences = CorrespondenceSet::read(input)?;
    let chained = chain_transforms(&correspondences.pairs())?;
    let ids: Vec<&str> = chained.iter().map(|(id, _)| id.as_str()).collect();
    let transforms: Vec<_> = chained.iter().map(|(_, e)| e.transform.clone()).collect();
    let sizes = ids
        .iter()
        .map(|id| match images.map(|d| image_path(d, id)) {
            Some(p) if p.is_file() => read_png(&p).map(|img| Some((img.width, img.height))),
            _ => Ok(None),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let set = TransformSet::from_transforms(ids.iter().copied(), &transforms, &sizes);
    emit(output, &to_json(&set))?;

    if show_table(output, verbosity) {
        let rows: Vec<Vec<String>> = chained
            .iter()
            .map(|(id, e)| vec![id.clone(), format!("{:.3e}", e.rms)])
            .collect();
        print_table(&["id", "fit rms"], &rows);
    }
    Ok(())
}
