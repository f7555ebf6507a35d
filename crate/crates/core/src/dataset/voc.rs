//! VOC-style per-image XML annotations.
//!
//! Boxes are written 1-based and inclusive:
//! `xmin = floor(xmin) + 1`, `ymin = floor(ymin) + 1`, `xmax = ceil(xmax)`,
//! `ymax = ceil(ymax)`.

use std::path::{Path, PathBuf};

use quick_xml::events::{BytesEnd, BytesStart, BytesText, Event};
use quick_xml::{Reader, Writer};

use super::DatasetError;
use crate::blending::Annotation;
use crate::imgcore::BoundingBox;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocObject {
    pub name: String,
    /// `[xmin, ymin, xmax, ymax]`, 1-based inclusive.
    pub bndbox: [i64; 4],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocAnnotation {
    pub filename: String,
    pub width: u32,
    pub height: u32,
    pub depth: u32,
    pub objects: Vec<VocObject>,
}

pub fn to_voc_box(b: &BoundingBox) -> [i64; 4] {
    [
        b.xmin.floor() as i64 + 1,
        b.ymin.floor() as i64 + 1,
        b.xmax.ceil() as i64,
        b.ymax.ceil() as i64,
    ]
}

impl VocAnnotation {
    pub fn from_annotations(filename: &str, width: u32, height: u32, annotations: &[Annotation]) -> Self {
        Self {
            filename: filename.to_string(),
            width,
            height,
            depth: 3,
            objects: annotations
                .iter()
                .map(|a| VocObject {
                    name: a.label.clone(),
                    bndbox: to_voc_box(&a.bbox),
                })
                .collect(),
        }
    }

    pub fn to_xml(&self) -> String {
        let mut w = Writer::new_with_indent(Vec::new(), b' ', 2);
        let open = |w: &mut Writer<Vec<u8>>, tag: &str| {
            w.write_event(Event::Start(BytesStart::new(tag))).expect("in-memory write");
        };
        let close = |w: &mut Writer<Vec<u8>>, tag: &str| {
            w.write_event(Event::End(BytesEnd::new(tag))).expect("in-memory write");
        };
        let leaf = |w: &mut Writer<Vec<u8>>, tag: &str, text: &str| {
            w.create_element(tag)
                .write_text_content(BytesText::new(text))
                .expect("in-memory write");
        };
        open(&mut w, "annotation");
        leaf(&mut w, "filename", &self.filename);
        open(&mut w, "size");
        leaf(&mut w, "width", &self.width.to_string());
        leaf(&mut w, "height", &self.height.to_string());
        leaf(&mut w, "depth", &self.depth.to_string());
        close(&mut w, "size");
        for o in &self.objects {
            open(&mut w, "object");
            leaf(&mut w, "name", &o.name);
            open(&mut w, "bndbox");
            for (tag, v) in ["xmin", "ymin", "xmax", "ymax"].iter().zip(o.bndbox) {
                leaf(&mut w, tag, &v.to_string());
            }
            close(&mut w, "bndbox");
            close(&mut w, "object");
        }
        close(&mut w, "annotation");
        let mut s = String::from_utf8(w.into_inner()).expect("xml writer emits utf-8");
        s.push('\n');
        s
    }

    pub fn parse(xml: &str) -> Result<Self, DatasetError> {
        let bad = |m: String| DatasetError::Corrupt(format!("voc: {m}"));
        let mut reader = Reader::from_str(xml);
        reader.config_mut().trim_text(true);
        let mut path: Vec<String> = Vec::new();
        let mut ann = VocAnnotation {
            filename: String::new(),
            width: 0,
            height: 0,
            depth: 0,
            objects: Vec::new(),
        };
        let mut seen_root = false;
        loop {
            match reader.read_event().map_err(|e| bad(e.to_string()))? {
                Event::Start(e) => {
                    let name = String::from_utf8_lossy(e.name().as_ref()).into_owned();
                    if path.is_empty() {
                        if name != "annotation" {
                            return Err(bad(format!("root element {name}")));
                        }
                        seen_root = true;
                    }
                    if name == "object" && path.len() == 1 {
                        ann.objects.push(VocObject {
                            name: String::new(),
                            bndbox: [0; 4],
                        });
                    }
                    path.push(name);
                }
                Event::End(_) => {
                    path.pop();
                }
                Event::Text(t) => {
                    let text = t.unescape().map_err(|e| bad(e.to_string()))?.into_owned();
                    let p: Vec<&str> = path.iter().map(String::as_str).collect();
                    let int = |s: &str| s.parse::<i64>().map_err(|_| bad(format!("bad integer {s:?}")));
                    match p.as_slice() {
                        ["annotation", "filename"] => ann.filename = text,
                        ["annotation", "size", "width"] => ann.width = int(&text)? as u32,
                        ["annotation", "size", "height"] => ann.height = int(&text)? as u32,
                        ["annotation", "size", "depth"] => ann.depth = int(&text)? as u32,
                        ["annotation", "object", "name"] => {
                            ann.objects.last_mut().ok_or_else(|| bad("name outside object".into()))?.name = text
                        }
                        ["annotation", "object", "bndbox", coord] => {
                            let slot = match *coord {
                                "xmin" => 0,
                                "ymin" => 1,
                                "xmax" => 2,
                                "ymax" => 3,
                                other => return Err(bad(format!("unknown bndbox field {other}"))),
                            };
                            ann.objects.last_mut().ok_or_else(|| bad("bndbox outside object".into()))?.bndbox[slot] = int(&text)?;
                        }
                        _ => {}
                    }
                }
                Event::Eof => break,
                _ => {}
            }
        }
        if !seen_root || !path.is_empty() {
            return Err(bad("truncated document".into()));
        }
        Ok(ann)
    }

    pub fn read(path: &Path) -> Result<Self, DatasetError> {
        let text = std::fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
        Self::parse(&text).map_err(|e| DatasetError::Corrupt(format!("{}: {e}", path.display())))
    }
}

/// Write `<out_dir>/<image stem>.xml` and return its path.
pub fn write_voc(
    image_file_name: &str,
    width: u32,
    height: u32,
    annotations: &[Annotation],
    out_dir: &Path,
) -> Result<PathBuf, DatasetError> {
    let stem = Path::new(image_file_name)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(image_file_name);
    let path = out_dir.join(format!("{stem}.xml"));
    let doc = VocAnnotation::from_annotations(image_file_name, width, height, annotations);
    std::fs::write(&path, doc.to_xml()).map_err(|e| DatasetError::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ann(label: &str, b: (f64, f64, f64, f64)) -> Annotation {
        Annotation {
            label: label.into(),
            bbox: BoundingBox::new(b.0, b.1, b.2, b.3).unwrap(),
        }
    }

    #[test]
    fn box_conversion_rule() {
        assert_eq!(to_voc_box(&BoundingBox::new(0.0, 0.0, 10.0, 10.0).unwrap()), [1, 1, 10, 10]);
        assert_eq!(to_voc_box(&BoundingBox::new(2.5, 3.5, 7.25, 9.0).unwrap()), [3, 4, 8, 9]);
    }

    #[test]
    fn field_layout() {
        let doc = VocAnnotation::from_annotations("scene_000001_direct.png", 640, 480, &[ann("mug", (0.0, 0.0, 10.0, 10.0))]);
        let xml = doc.to_xml();
        for needle in [
            "<filename>scene_000001_direct.png</filename>",
            "<width>640</width>",
            "<height>480</height>",
            "<depth>3</depth>",
            "<name>mug</name>",
            "<xmin>1</xmin>",
            "<ymax>10</ymax>",
        ] {
            assert!(xml.contains(needle), "missing {needle} in\n{xml}");
        }
    }

    #[test]
    fn write_then_read_file() {
        let dir = tempfile::tempdir().unwrap();
        let anns = [ann("a&b", (2.5, 3.5, 7.25, 9.0)), ann("c", (0.0, 0.0, 4.0, 4.0))];
        let p = write_voc("x.png", 32, 32, &anns, dir.path()).unwrap();
        assert_eq!(p.file_name().unwrap(), "x.xml");
        let back = VocAnnotation::read(&p).unwrap();
        assert_eq!(back.objects[0].bndbox, [3, 4, 8, 9]);
        assert_eq!(back.objects[0].name, "a&b");
        assert_eq!(back, VocAnnotation::from_annotations("x.png", 32, 32, &anns));
    }

    #[test]
    fn empty_object_list_allowed() {
        let doc = VocAnnotation::from_annotations("e.png", 10, 10, &[]);
        assert_eq!(VocAnnotation::parse(&doc.to_xml()).unwrap(), doc);
    }

    #[test]
    fn malformed_documents_rejected() {
        assert!(VocAnnotation::parse("<annotation><size><width>x</width></size></annotation>").is_err());
        assert!(VocAnnotation::parse("<other/>").is_err());
        assert!(VocAnnotation::parse("<annotation><object>").is_err());
    }

    proptest! {
        #[test]
        fn round_trip(
            name in "[a-z_<>&]{1,12}",
            boxes in proptest::collection::vec((0u32..500, 0u32..400, 1u32..200, 1u32..200, 0u8..4), 0..8),
        ) {
            let anns: Vec<Annotation> = boxes
                .iter()
                .map(|&(x, y, w, h, frac)| {
                    let f = frac as f64 * 0.25;
                    ann(&name, (x as f64 + f, y as f64, (x + w) as f64 + f, (y + h) as f64))
                })
                .collect();
            let doc = VocAnnotation::from_annotations("img.png", 640, 480, &anns);
            prop_assert_eq!(VocAnnotation::parse(&doc.to_xml()).unwrap(), doc);
        }
    }
}
