//! VOC XML and COCO JSON writers and their round trip.

use cutpaste::blending::Annotation;
use cutpaste::dataset::coco::{CocoDataset, CocoRecord};
use cutpaste::dataset::voc::VocAnnotation;
use cutpaste::imgcore::BoundingBox;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let anns = vec![
        Annotation { label: "cereal".into(), bbox: BoundingBox::new(0.0, 0.0, 10.0, 10.0)? },
        Annotation { label: "mug".into(), bbox: BoundingBox::new(2.5, 3.5, 7.25, 9.0)? },
    ];

    let voc = VocAnnotation::from_annotations("scene_000000_direct.png", 640, 480, &anns);
    let xml = voc.to_xml();
    print!("{xml}");
    assert_eq!(VocAnnotation::parse(&xml)?, voc);

    let records = [CocoRecord { file_name: "scene_000000_direct.png".into(), width: 640, height: 480, annotations: &anns }];
    let coco = CocoDataset::build(&records, &["cereal".to_string(), "mug".to_string()])?;
    let json = coco.to_json();
    print!("{json}");
    assert_eq!(CocoDataset::parse(&json)?, coco);
    println!("both formats round-trip");
    Ok(())
}
