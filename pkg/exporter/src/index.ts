export { Rng, mixSeed } from "./rng";
export {
  RawImage,
  ResizePolicy,
  centerCrop,
  cloneImage,
  flipHorizontal,
  gaussianBlur,
  makeImage,
  resampleRect,
  resize,
  resizeTo,
} from "./image";
export { AugmentConfig, DEFAULT_AUGMENT, augment, colorJitter, preprocess, randomResizedCrop } from "./augment";
export { Backbone, BackboneError, StubBackbone, resolveBackbone } from "./backbone";
export {
  CIFAR10_LABELS,
  DatasetError,
  ImageDataset,
  LabeledImage,
  decodePpm,
  loadCifar10,
  loadDataset,
  loadImageFolder,
} from "./dataset";
export {
  MWIE_MAGIC,
  MWIE_VERSION,
  MwieFile,
  MwieFormatError,
  MwieRecord,
  decodeMwie,
  encodeMwie,
} from "./mwie";
export { DEFAULT_EXPORT, ExportOptions, exportDataset, exportToFile } from "./export";
