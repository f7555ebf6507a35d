//! COCO-style JSON: one file for the whole dataset.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::blending::Annotation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoImage {
    pub id: u64,
    pub file_name: String,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoAnnotation {
    pub id: u64,
    pub image_id: u64,
    pub category_id: u64,
    /// `[x, y, width, height]` of the half-open box.
    pub bbox: [f64; 4],
    pub area: f64,
    pub iscrowd: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CocoCategory {
    pub id: u64,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoDataset {
    pub images: Vec<CocoImage>,
    pub annotations: Vec<CocoAnnotation>,
    pub categories: Vec<CocoCategory>,
}

/// One image and its annotations, as handed to [`CocoDataset::build`].
#[derive(Debug, Clone)]
pub struct CocoRecord<'a> {
    pub file_name: String,
    pub width: u32,
    pub height: u32,
    pub annotations: &'a [Annotation],
}

impl CocoDataset {
    /// Assign ids in record order: images and annotations count from 1, and
    /// categories follow the order of `categories`.
    pub fn build(records: &[CocoRecord<'_>], categories: &[String]) -> Result<Self, DatasetError> {
        let cats: Vec<CocoCategory> = categories
            .iter()
            .enumerate()
            .map(|(i, n)| CocoCategory {
                id: i as u64 + 1,
                name: n.clone(),
            })
            .collect();
        let mut images = Vec::with_capacity(records.len());
        let mut annotations = Vec::new();
        for (i, r) in records.iter().enumerate() {
            let image_id = i as u64 + 1;
            images.push(CocoImage {
                id: image_id,
                file_name: r.file_name.clone(),
                width: r.width,
                height: r.height,
            });
            for a in r.annotations {
                let category_id = cats
                    .iter()
                    .find(|c| c.name == a.label)
                    .ok_or_else(|| DatasetError::Corrupt(format!("label {} not in category set", a.label)))?
                    .id;
                let b = &a.bbox;
                annotations.push(CocoAnnotation {
                    id: annotations.len() as u64 + 1,
                    image_id,
                    category_id,
                    bbox: [b.xmin, b.ymin, b.width(), b.height()],
                    area: b.area(),
                    iscrowd: 0,
                });
            }
        }
        Ok(Self {
            images,
            annotations,
            categories: cats,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self, DatasetError> {
        serde_json::from_str(text).map_err(|e| DatasetError::Corrupt(format!("coco: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self, DatasetError> {
        let text = std::fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
        Self::parse(&text).map_err(|e| DatasetError::Corrupt(format!("{}: {e}", path.display())))
    }

    pub fn category_name(&self, id: u64) -> Option<&str> {
        self.categories.iter().find(|c| c.id == id).map(|c| c.name.as_str())
    }
}

pub fn write_coco(records: &[CocoRecord<'_>], categories: &[String], out_path: &Path) -> Result<PathBuf, DatasetError> {
    let ds = CocoDataset::build(records, categories)?;
    std::fs::write(out_path, ds.to_json()).map_err(|e| DatasetError::io(out_path, e))?;
    Ok(out_path.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgcore::BoundingBox;
    use proptest::prelude::*;

    fn ann(label: &str, b: (f64, f64, f64, f64)) -> Annotation {
        Annotation {
            label: label.into(),
            bbox: BoundingBox::new(b.0, b.1, b.2, b.3).unwrap(),
        }
    }

    #[test]
    fn bbox_is_xywh() {
        let anns = [ann("mug", (0.0, 0.0, 10.0, 10.0))];
        let recs = [CocoRecord {
            file_name: "a.png".into(),
            width: 20,
            height: 20,
            annotations: &anns,
        }];
        let ds = CocoDataset::build(&recs, &["box".into(), "mug".into()]).unwrap();
        assert_eq!(ds.annotations[0].bbox, [0.0, 0.0, 10.0, 10.0]);
        assert_eq!(ds.annotations[0].category_id, 2);
        let json = ds.to_json();
        assert!(json.contains("\"bbox\": [\n"));
        assert!(json.contains("\"images\""));
        assert!(json.contains("\"categories\""));
    }

    #[test]
    fn ids_follow_record_order() {
        let anns = [ann("a", (1.0, 1.0, 5.0, 5.0)), ann("a", (6.0, 6.0, 9.0, 9.0))];
        let recs: Vec<CocoRecord> = (0..6)
            .map(|i| CocoRecord {
                file_name: format!("scene_{:06}_{}.png", i / 3, ["direct", "gaussian", "poisson"][i % 3]),
                width: 10,
                height: 10,
                annotations: &anns,
            })
            .collect();
        let ds = CocoDataset::build(&recs, &["a".into()]).unwrap();
        assert_eq!(ds.images.len(), 6);
        assert_eq!(ds.annotations.len(), 12);
        assert_eq!(ds.annotations[11].image_id, 6);
        assert_eq!(ds.to_json(), CocoDataset::build(&recs, &["a".into()]).unwrap().to_json());
    }

    #[test]
    fn unknown_label_rejected() {
        let anns = [ann("ghost", (1.0, 1.0, 5.0, 5.0))];
        let recs = [CocoRecord {
            file_name: "a.png".into(),
            width: 10,
            height: 10,
            annotations: &anns,
        }];
        assert!(CocoDataset::build(&recs, &["a".into()]).is_err());
    }

    proptest! {
        #[test]
        fn json_round_trip(boxes in proptest::collection::vec((0.0..600.0f64, 0.0..400.0f64, 0.25..100.0f64, 0.25..100.0f64), 0..10)) {
            let anns: Vec<Annotation> = boxes.iter().map(|&(x, y, w, h)| ann("obj", (x, y, x + w, y + h))).collect();
            let recs = [CocoRecord { file_name: "i.png".into(), width: 640, height: 480, annotations: &anns }];
            let ds = CocoDataset::build(&recs, &["obj".into()]).unwrap();
            prop_assert_eq!(CocoDataset::parse(&ds.to_json()).unwrap(), ds);
        }
    }
}
