//! Segmentation and detection metrics, and the loss family with analytic
//! gradients.

pub mod detection;
pub mod losses;
pub mod seg;

pub use detection::{box_iou, components, detection_ap_ar, BBox, ScoredBox};
pub use losses::{
    bce_loss, class_weights, coherence_loss, combined_loss, focal_loss, focal_loss_grad, smooth_l1,
    smooth_l1_grad, soft_dice_loss, wce_loss, LossWeights, ViewPair, CLIP,
};
pub use seg::{dice, iou, mean_aggregate, pixel_precision_recall, MeanKind, Score};
